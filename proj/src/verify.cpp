#include "opsel/verify.hpp"

#include <algorithm>
#include <bit>
#include <cstdint>
#include <functional>
#include <limits>

namespace opsel {
namespace {

std::vector<bool> slate_mask(std::size_t m, std::span<const OpinionIndex> slate) {
  std::vector<bool> mask(m, false);
  for (OpinionIndex i : slate) {
    if (i >= m) throw std::out_of_range("slate index out of range");
    mask[i] = true;
  }
  return mask;
}

bool reaches_quota(std::size_t group_size, std::size_t n, std::size_t k) {
  return k * group_size >= n;
}

}  // namespace

std::string_view to_string(BjrStatus status) {
  switch (status) {
    case BjrStatus::satisfied: return "satisfied";
    case BjrStatus::violated: return "violated";
    case BjrStatus::malformed: return "malformed certificate";
  }
  return "unknown";
}

JrReport check_jr(const ApprovalMatrix& matrix, std::span<const OpinionIndex> slate) {
  const std::size_t n = matrix.n_users();
  const std::size_t m = matrix.n_opinions();
  const std::size_t k = slate.size();
  if (k == 0) throw std::invalid_argument("JR check needs a non-empty slate");
  slate_mask(m, slate);  // range check

  std::vector<bool> represented(n, false);
  for (UserIndex u = 0; u < n; ++u) {
    for (OpinionIndex i : slate) {
      if (matrix.approves(u, i)) {
        represented[u] = true;
        break;
      }
    }
  }
  for (OpinionIndex q = 0; q < m; ++q) {
    std::vector<UserIndex> block;
    for (UserIndex u = 0; u < n; ++u) {
      if (!represented[u] && matrix.approves(u, q)) block.push_back(u);
    }
    if (!block.empty() && reaches_quota(block.size(), n, k)) {
      return {false, BlockingWitness{q, std::move(block)}};
    }
  }
  return {};
}

BjrReport check_bjr_certificate(const ApprovalMatrix& matrix,
                                std::span<const OpinionIndex> slate,
                                const AssignmentCertificate& certificate) {
  const std::size_t n = matrix.n_users();
  const std::size_t m = matrix.n_opinions();
  const std::size_t k = slate.size();
  auto malformed = [](std::string why) {
    BjrReport r;
    r.status = BjrStatus::malformed;
    r.reason = std::move(why);
    return r;
  };
  if (k == 0) return malformed("empty slate");
  if (certificate.assignment.size() != n) return malformed("assignment is not total over users");
  if (certificate.budgets.size() != k) return malformed("one budget per selected opinion required");

  std::size_t budget_sum = 0;
  for (std::size_t b : certificate.budgets) {
    if (b != n / k && b != (n + k - 1) / k) return malformed("budget outside {floor(n/k), ceil(n/k)}");
    budget_sum += b;
  }
  if (budget_sum != n) return malformed("budgets do not sum to n");

  std::vector<std::size_t> load(k, 0);
  for (OpinionIndex target : certificate.assignment) {
    auto it = std::find(slate.begin(), slate.end(), target);
    if (it == slate.end()) return malformed("user assigned outside the slate");
    ++load[static_cast<std::size_t>(it - slate.begin())];
  }
  for (std::size_t j = 0; j < k; ++j) {
    if (load[j] != certificate.budgets[j]) return malformed("assignment counts differ from budgets");
  }

  for (OpinionIndex q = 0; q < m; ++q) {
    std::vector<UserIndex> block;
    for (UserIndex u = 0; u < n; ++u) {
      if (matrix.approves(u, q) && !matrix.approves(u, certificate.assignment[u])) block.push_back(u);
    }
    if (!block.empty() && reaches_quota(block.size(), n, k)) {
      BjrReport r;
      r.status = BjrStatus::violated;
      r.witness = BlockingWitness{q, std::move(block)};
      return r;
    }
  }
  return {};
}

bool brute_force_bjr_exists(const ApprovalMatrix& matrix, std::span<const OpinionIndex> slate) {
  const std::size_t n = matrix.n_users();
  const std::size_t m = matrix.n_opinions();
  const std::size_t k = slate.size();
  if (n > 12 || k > 4) {
    throw EnumerationTooLarge("brute_force_bjr_exists is limited to n <= 12 and k <= 4");
  }
  if (k == 0) throw std::invalid_argument("BJR check needs a non-empty slate");
  (void)slate_mask(m, slate);  // range check

  const std::size_t lo = n / k;
  const std::size_t hi = (n + k - 1) / k;
  std::vector<std::size_t> load(k, 0);
  // unhappy[q]: approvers of q assigned to a slot they do not approve. The
  // counts only grow along a branch, so reaching the quota prunes it.
  std::vector<std::size_t> unhappy(m, 0);

  std::function<bool(UserIndex)> assign = [&](UserIndex u) -> bool {
    if (u == n) {
      return std::all_of(load.begin(), load.end(), [&](std::size_t c) { return c >= lo; });
    }
    std::size_t deficit = 0;
    for (std::size_t c : load) deficit += c < lo ? lo - c : 0;
    if (deficit > n - u) return false;

    for (std::size_t j = 0; j < k; ++j) {
      if (load[j] == hi) continue;
      const bool happy = matrix.approves(u, slate[j]);
      bool blocked = false;
      if (!happy) {
        for (OpinionIndex q = 0; q < m; ++q) {
          if (matrix.approves(u, q) && reaches_quota(++unhappy[q], n, k)) blocked = true;
        }
      }
      ++load[j];
      if (!blocked && assign(u + 1)) return true;
      --load[j];
      if (!happy) {
        for (OpinionIndex q = 0; q < m; ++q) {
          if (matrix.approves(u, q)) --unhappy[q];
        }
      }
    }
    return false;
  };
  return assign(0);
}

bool brute_force_jr(const ApprovalMatrix& matrix, std::span<const OpinionIndex> slate) {
  const std::size_t n = matrix.n_users();
  const std::size_t m = matrix.n_opinions();
  const std::size_t k = slate.size();
  if (n > 16) throw EnumerationTooLarge("brute_force_jr is limited to n <= 16");
  if (k == 0) throw std::invalid_argument("JR check needs a non-empty slate");
  for (std::uint32_t mask = 1; mask < (std::uint32_t{1} << n); ++mask) {
    const auto size = static_cast<std::size_t>(std::popcount(mask));
    if (!reaches_quota(size, n, k)) continue;
    bool cohesive = false;
    for (OpinionIndex q = 0; q < m && !cohesive; ++q) {
      bool all = true;
      for (UserIndex u = 0; u < n && all; ++u) {
        if ((mask >> u) & 1U) all = matrix.approves(u, q);
      }
      cohesive = all;
    }
    if (!cohesive) continue;
    bool represented = false;
    for (UserIndex u = 0; u < n && !represented; ++u) {
      if (!((mask >> u) & 1U)) continue;
      for (OpinionIndex i : slate) {
        if (matrix.approves(u, i)) {
          represented = true;
          break;
        }
      }
    }
    if (!represented) return false;
  }
  return true;
}

CoverageOptimum brute_force_min_cg(const DistanceIndex& index, std::size_t k) {
  const std::size_t m = index.size();
  if (k < 1 || k > m) throw std::invalid_argument("k out of range");
  // C(m, k), in floating point so large m cannot overflow.
  double combos = 1.0;
  for (std::size_t i = 0; i < k; ++i) {
    combos = combos * static_cast<double>(m - i) / static_cast<double>(i + 1);
  }
  if (combos > 1e6) throw EnumerationTooLarge("brute_force_min_cg is limited to C(m,k) <= 10^6");

  std::vector<OpinionIndex> subset(k);
  for (std::size_t i = 0; i < k; ++i) subset[i] = i;
  CoverageOptimum best;
  best.value = std::numeric_limits<double>::infinity();
  std::vector<bool> in_subset(m);
  while (true) {
    std::fill(in_subset.begin(), in_subset.end(), false);
    for (OpinionIndex s : subset) in_subset[s] = true;
    double gap = 0.0;
    for (OpinionIndex o = 0; o < m; ++o) {
      if (in_subset[o]) continue;
      double nearest = std::numeric_limits<double>::infinity();
      for (OpinionIndex s : subset) nearest = std::min(nearest, index(o, s));
      gap = std::max(gap, nearest);
    }
    if (gap < best.value) {
      best.value = gap;
      best.subset = subset;
    }
    // Next combination in lexicographic order.
    std::size_t pos = k;
    while (pos > 0 && subset[pos - 1] == m - k + pos - 1) --pos;
    if (pos == 0) break;
    ++subset[pos - 1];
    for (std::size_t j = pos; j < k; ++j) subset[j] = subset[j - 1] + 1;
  }
  return best;
}

}  // namespace opsel
