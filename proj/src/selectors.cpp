#include "opsel/selectors.hpp"

#include <algorithm>
#include <functional>
#include <limits>
#include <numeric>
#include <stdexcept>
#include <string>

#include "greedy_common.hpp"
#include "opsel/rng.hpp"
#include "opsel/scoring.hpp"

namespace opsel {
namespace detail {

std::vector<std::size_t> pool_coverage(const ApprovalMatrix& matrix,
                                       const std::vector<bool>& available,
                                       const std::vector<bool>& pool) {
  const std::size_t m = matrix.n_opinions();
  std::vector<std::size_t> cover(m, 0);
  for (UserIndex u = 0; u < matrix.n_users(); ++u) {
    if (!pool[u]) continue;
    const auto row = matrix.row(u);
    for (OpinionIndex i = 0; i < m; ++i) {
      if (available[i] && row[i] != 0) ++cover[i];
    }
  }
  return cover;
}

std::size_t unique_approvers(const ApprovalMatrix& matrix, const DistanceIndex& index,
                             OpinionIndex opinion, const std::vector<bool>& pool) {
  const auto& nbrs = index.neighbors(opinion);
  std::size_t count = 0;
  for (UserIndex u = 0; u < matrix.n_users(); ++u) {
    if (!pool[u] || !matrix.approves(u, opinion)) continue;
    const bool shared = std::any_of(nbrs.begin(), nbrs.end(),
                                    [&](OpinionIndex j) { return matrix.approves(u, j); });
    if (!shared) ++count;
  }
  return count;
}

std::optional<OpinionIndex> pick_stage1(const ApprovalMatrix& matrix,
                                        const std::vector<bool>& available,
                                        const std::vector<bool>& pool, std::size_t demand,
                                        const DistanceIndex* diversity,
                                        std::span<const std::size_t> rank) {
  const auto cover = pool_coverage(matrix, available, pool);
  std::size_t best_cover = 0;
  std::vector<OpinionIndex> tied;
  for (OpinionIndex i = 0; i < matrix.n_opinions(); ++i) {
    if (!available[i] || cover[i] < demand) continue;
    if (tied.empty() || cover[i] > best_cover) {
      best_cover = cover[i];
      tied.assign(1, i);
    } else if (cover[i] == best_cover) {
      tied.push_back(i);
    }
  }
  if (tied.empty()) return std::nullopt;
  if (tied.size() == 1) return tied.front();

  auto final_key = [&](OpinionIndex i) { return rank.empty() ? i : rank[i]; };
  if (diversity == nullptr) {
    return *std::min_element(tied.begin(), tied.end(), [&](OpinionIndex a, OpinionIndex b) {
      return final_key(a) < final_key(b);
    });
  }

  // Lexicographic: fewer neighbors, more unique approvers, lowest rank.
  OpinionIndex best = tied.front();
  std::size_t best_nbrs = diversity->neighbors(best).size();
  std::size_t best_unique = unique_approvers(matrix, *diversity, best, pool);
  for (std::size_t t = 1; t < tied.size(); ++t) {
    const OpinionIndex i = tied[t];
    const std::size_t nbrs = diversity->neighbors(i).size();
    if (nbrs > best_nbrs) continue;
    const std::size_t unique = unique_approvers(matrix, *diversity, i, pool);
    const bool better = nbrs < best_nbrs || unique > best_unique ||
                        (unique == best_unique && final_key(i) < final_key(best));
    if (better) {
      best = i;
      best_nbrs = nbrs;
      best_unique = unique;
    }
  }
  return best;
}

std::vector<UserIndex> take_approvers(const ApprovalMatrix& matrix, OpinionIndex opinion,
                                      const std::vector<bool>& pool,
                                      const std::vector<std::size_t>& residual_degree,
                                      std::size_t limit, std::span<const std::size_t> rank) {
  std::vector<UserIndex> approvers;
  for (UserIndex u = 0; u < matrix.n_users(); ++u) {
    if (pool[u] && matrix.approves(u, opinion)) approvers.push_back(u);
  }
  auto key = [&](UserIndex u) { return rank.empty() ? u : rank[u]; };
  std::sort(approvers.begin(), approvers.end(), [&](UserIndex a, UserIndex b) {
    if (residual_degree[a] != residual_degree[b]) return residual_degree[a] < residual_degree[b];
    return key(a) < key(b);
  });
  if (approvers.size() > limit) approvers.resize(limit);
  return approvers;
}

void complete_assignment(const ApprovalMatrix& matrix,
                         std::span<const OpinionIndex> slate,
                         std::span<const std::size_t> budgets,
                         std::vector<std::size_t>& slot_fill,
                         std::vector<OpinionIndex>& assignment) {
  const std::size_t k = slate.size();
  std::vector<std::size_t> by_index(k);
  std::iota(by_index.begin(), by_index.end(), 0);
  std::sort(by_index.begin(), by_index.end(),
            [&](std::size_t a, std::size_t b) { return slate[a] < slate[b]; });

  std::vector<UserIndex> leftover;
  for (UserIndex u = 0; u < assignment.size(); ++u) {
    if (assignment[u] == kUnassigned) leftover.push_back(u);
  }
  // matched[j]: leftover users placed on slot j by the matching.
  std::vector<std::vector<UserIndex>> matched(k);
  std::vector<std::size_t> slot_of(assignment.size(), kUnassigned);
  std::vector<char> visited(k);

  std::function<bool(UserIndex)> augment = [&](UserIndex u) -> bool {
    for (std::size_t j : by_index) {
      if (visited[j] || !matrix.approves(u, slate[j])) continue;
      visited[j] = 1;
      if (slot_fill[j] + matched[j].size() < budgets[j]) {
        matched[j].push_back(u);
        slot_of[u] = j;
        return true;
      }
      for (auto& v : matched[j]) {
        if (augment(v)) {
          v = u;
          slot_of[u] = j;
          return true;
        }
      }
    }
    return false;
  };
  for (UserIndex u : leftover) {
    std::fill(visited.begin(), visited.end(), 0);
    augment(u);
  }
  for (std::size_t j = 0; j < k; ++j) slot_fill[j] += matched[j].size();

  for (UserIndex u : leftover) {
    if (slot_of[u] != kUnassigned) {
      assignment[u] = slate[slot_of[u]];
      continue;
    }
    std::size_t best = kUnassigned;
    for (std::size_t j : by_index) {
      if (slot_fill[j] < budgets[j]) {
        best = j;
        break;
      }
    }
    // Budgets sum to n, so capacity always remains for an unassigned user.
    assignment[u] = slate[best];
    ++slot_fill[best];
  }
}

}  // namespace detail

namespace {

std::vector<std::size_t> initial_residual_degree(const ApprovalMatrix& matrix) {
  std::vector<std::size_t> degree(matrix.n_users(), 0);
  for (UserIndex u = 0; u < matrix.n_users(); ++u) {
    for (auto c : matrix.row(u)) degree[u] += c != 0 ? 1 : 0;
  }
  return degree;
}

void mark_selected(const ApprovalMatrix& matrix, OpinionIndex p,
                   std::vector<std::size_t>& residual_degree) {
  for (UserIndex u = 0; u < matrix.n_users(); ++u) {
    if (matrix.approves(u, p)) --residual_degree[u];
  }
}

Selection top_k_selection(std::span<const double> scores, std::size_t k, Rule rule) {
  auto order = rank_descending(scores);
  order.resize(k);
  Selection sel;
  sel.opinions = std::move(order);
  sel.rule = rule;
  return sel;
}

// Shared body of select_bjr and select_diverse_bjr; `diversity` switches on
// the epsilon-neighbor machinery.
SelectionResult balanced_greedy(const Instance& instance, const SelectorConfig& config,
                                const DistanceIndex* diversity) {
  const auto& matrix = instance.matrix;
  const std::size_t n = matrix.n_users();
  const std::size_t m = matrix.n_opinions();
  const std::size_t k = config.k;
  check_config(config, m);

  const auto budgets = bjr_budgets(n, k);
  const auto filler = random_scores(m, config.seed);

  std::vector<bool> available(m, true);
  std::vector<bool> ineligible(m, false);
  std::vector<bool> pool(n, true);
  auto residual = initial_residual_degree(matrix);
  std::vector<OpinionIndex> assignment(n, detail::kUnassigned);
  std::vector<std::size_t> slot_fill(k, 0);

  Selection sel;
  sel.rule = diversity ? Rule::diverse_bjr : Rule::bjr;
  sel.seed = config.seed;

  for (std::size_t t = 0; t < k; ++t) {
    const std::size_t demand = budgets[t];
    auto pick = detail::pick_stage1(matrix, available, pool, demand, diversity);
    if (!pick) {
      std::vector<OpinionIndex> eligible;
      for (OpinionIndex i = 0; i < m; ++i) {
        if (available[i] && !ineligible[i]) eligible.push_back(i);
      }
      if (eligible.empty()) {
        for (OpinionIndex i = 0; i < m; ++i) {
          if (available[i]) eligible.push_back(i);
        }
      }
      pick = argmax_among(filler.scores, eligible);
    }
    const OpinionIndex p = *pick;
    sel.opinions.push_back(p);
    available[p] = false;
    mark_selected(matrix, p, residual);

    for (UserIndex u : detail::take_approvers(matrix, p, pool, residual, demand)) {
      pool[u] = false;
      assignment[u] = p;
      ++slot_fill[t];
    }

    if (diversity == nullptr || t + 1 == k) continue;
    std::vector<OpinionIndex> fresh;
    for (OpinionIndex j : diversity->neighbors(p)) {
      if (available[j] && !ineligible[j]) fresh.push_back(j);
    }
    if (fresh.empty()) continue;

    FeasibilityQuery query;
    for (UserIndex u = 0; u < n; ++u) {
      if (pool[u]) query.unmatched.push_back(u);
    }
    for (OpinionIndex i = 0; i < m; ++i) {
      const bool excluded = std::find(fresh.begin(), fresh.end(), i) != fresh.end();
      if (available[i] && !ineligible[i] && !excluded) query.candidates.push_back(i);
    }
    query.demands.assign(budgets.begin() + static_cast<std::ptrdiff_t>(t + 1), budgets.end());
    query.selected = sel.opinions;
    query.trials = config.trials;
    query.seed = mix_seed(config.seed, t);
    if (bjr_feasible(matrix, query, diversity).feasible) {
      for (OpinionIndex j : fresh) ineligible[j] = true;
    }
  }

  detail::complete_assignment(matrix, sel.opinions, budgets, slot_fill, assignment);

  if (diversity) {
    sel.params["epsilon"] = diversity->epsilon();
    sel.params["trials"] = static_cast<double>(config.trials);
  }
  return {std::move(sel), AssignmentCertificate{std::move(assignment), budgets}};
}

}  // namespace

void check_config(const SelectorConfig& config, std::size_t n_opinions) {
  if (config.k < 1) throw std::invalid_argument("k must be at least 1");
  if (config.k > n_opinions) {
    throw std::invalid_argument("k = " + std::to_string(config.k) + " exceeds the " +
                                std::to_string(n_opinions) + " available opinions");
  }
  if (!(config.epsilon >= 0.0 && config.epsilon <= 1.0)) {
    throw std::invalid_argument("epsilon must lie in [0, 1]");
  }
  if (config.trials < 1) throw std::invalid_argument("trials must be at least 1");
}

std::vector<std::size_t> bjr_budgets(std::size_t n_users, std::size_t k) {
  if (k == 0) throw std::invalid_argument("k must be at least 1");
  std::vector<std::size_t> budgets(k, n_users / k);
  for (std::size_t j = 0; j < n_users % k; ++j) ++budgets[j];
  return budgets;
}

Selection select_random(const Instance& instance, const SelectorConfig& config) {
  check_config(config, instance.n_opinions());
  auto sel = top_k_selection(random_scores(instance.n_opinions(), config.seed).scores,
                             config.k, Rule::random);
  sel.seed = config.seed;
  return sel;
}

Selection select_engagement(const Instance& instance, const SelectorConfig& config) {
  check_config(config, instance.n_opinions());
  return top_k_selection(engagement_scores(instance.matrix).scores, config.k,
                         Rule::engagement);
}

Selection select_bridging(const Instance& instance, const SelectorConfig& config) {
  if (!instance.groups) throw MissingPartition("bridging needs a group partition");
  check_config(config, instance.n_opinions());
  return top_k_selection(cga_scores(instance.matrix, *instance.groups).scores, config.k,
                         Rule::bridging);
}

Selection select_diversity(const Instance& instance, const SelectorConfig& config,
                           const DistanceIndex& index) {
  const std::size_t m = instance.n_opinions();
  check_config(config, m);
  if (index.size() != m) throw std::invalid_argument("distance index does not match instance");

  // 1-center: smallest eccentricity.
  OpinionIndex center = 0;
  double best_radius = std::numeric_limits<double>::infinity();
  for (OpinionIndex i = 0; i < m; ++i) {
    const auto row = index.row(i);
    const double radius = *std::max_element(row.begin(), row.end());
    if (radius < best_radius) {
      best_radius = radius;
      center = i;
    }
  }

  Selection sel;
  sel.rule = Rule::diversity;
  sel.opinions.push_back(center);
  std::vector<bool> chosen(m, false);
  chosen[center] = true;
  std::vector<double> nearest(index.row(center).begin(), index.row(center).end());
  while (sel.opinions.size() < config.k) {
    OpinionIndex far = m;
    for (OpinionIndex i = 0; i < m; ++i) {
      if (chosen[i]) continue;
      if (far == m || nearest[i] > nearest[far]) far = i;
    }
    sel.opinions.push_back(far);
    chosen[far] = true;
    const auto row = index.row(far);
    for (OpinionIndex i = 0; i < m; ++i) nearest[i] = std::min(nearest[i], row[i]);
  }
  return sel;
}

Selection select_jr(const Instance& instance, const SelectorConfig& config) {
  const auto& matrix = instance.matrix;
  const std::size_t n = matrix.n_users();
  const std::size_t m = matrix.n_opinions();
  check_config(config, m);
  const std::size_t threshold = (n + config.k - 1) / config.k;

  std::vector<bool> available(m, true);
  std::vector<bool> unrepresented(n, true);
  Selection sel;
  sel.rule = Rule::jr;
  sel.seed = config.seed;
  sel.params["threshold"] = static_cast<double>(threshold);

  // Stage 1: cover blocks of at least `threshold` unrepresented users.
  while (sel.opinions.size() < config.k) {
    const auto cover = detail::pool_coverage(matrix, available, unrepresented);
    OpinionIndex best = m;
    for (OpinionIndex i = 0; i < m; ++i) {
      if (available[i] && (best == m || cover[i] > cover[best])) best = i;
    }
    if (cover[best] < threshold) break;
    sel.opinions.push_back(best);
    available[best] = false;
    for (UserIndex u = 0; u < n; ++u) {
      if (matrix.approves(u, best)) unrepresented[u] = false;
    }
  }

  // Stage 2: random scoring fills the rest.
  const auto filler = random_scores(m, config.seed);
  for (OpinionIndex i : rank_descending(filler.scores)) {
    if (sel.opinions.size() == config.k) break;
    if (available[i]) {
      sel.opinions.push_back(i);
      available[i] = false;
    }
  }
  return sel;
}

SelectionResult select_bjr(const Instance& instance, const SelectorConfig& config) {
  return balanced_greedy(instance, config, nullptr);
}

SelectionResult select_diverse_bjr(const Instance& instance, const SelectorConfig& config,
                                   const DistanceIndex& index) {
  if (index.size() != instance.n_opinions()) {
    throw std::invalid_argument("distance index does not match instance");
  }
  return balanced_greedy(instance, config, &index);
}

SelectionResult select(const Instance& instance, const SelectorConfig& config,
                       const DistanceIndex* index) {
  std::optional<DistanceIndex> owned;
  auto need_index = [&]() -> const DistanceIndex& {
    if (index) return *index;
    owned.emplace(instance.matrix, config.epsilon);
    return *owned;
  };
  switch (config.rule) {
    case Rule::random: return {select_random(instance, config), std::nullopt};
    case Rule::engagement: return {select_engagement(instance, config), std::nullopt};
    case Rule::bridging: return {select_bridging(instance, config), std::nullopt};
    case Rule::diversity:
      return {select_diversity(instance, config, need_index()), std::nullopt};
    case Rule::jr: return {select_jr(instance, config), std::nullopt};
    case Rule::bjr: return select_bjr(instance, config);
    case Rule::diverse_bjr: return select_diverse_bjr(instance, config, need_index());
  }
  throw std::invalid_argument("unknown rule");
}

AssignmentCertificate greedy_certificate(const ApprovalMatrix& matrix,
                                         std::span<const OpinionIndex> slate) {
  const std::size_t n = matrix.n_users();
  const auto budgets = bjr_budgets(n, slate.size());
  std::vector<bool> pool(n, true);
  auto residual = initial_residual_degree(matrix);
  std::vector<OpinionIndex> assignment(n, detail::kUnassigned);
  std::vector<std::size_t> slot_fill(slate.size(), 0);
  for (std::size_t j = 0; j < slate.size(); ++j) {
    if (slate[j] >= matrix.n_opinions()) throw std::out_of_range("slate index out of range");
    mark_selected(matrix, slate[j], residual);
    for (UserIndex u : detail::take_approvers(matrix, slate[j], pool, residual, budgets[j])) {
      pool[u] = false;
      assignment[u] = slate[j];
      ++slot_fill[j];
    }
  }
  detail::complete_assignment(matrix, slate, budgets, slot_fill, assignment);
  return {std::move(assignment), budgets};
}

}  // namespace opsel
