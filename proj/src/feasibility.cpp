#include <algorithm>
#include <functional>
#include <numeric>
#include <stdexcept>

#include "greedy_common.hpp"
#include "opsel/rng.hpp"
#include "opsel/selectors.hpp"

namespace opsel {
namespace {

// Random permutation ranks used as the final tie-break in trials after the
// first.
std::vector<std::size_t> shuffled_ranks(std::size_t count, Rng& rng) {
  std::vector<std::size_t> perm(count);
  std::iota(perm.begin(), perm.end(), std::size_t{0});
  for (std::size_t i = count; i > 1; --i) {
    std::swap(perm[i - 1], perm[rng.below(i)]);
  }
  std::vector<std::size_t> rank(count);
  for (std::size_t pos = 0; pos < count; ++pos) rank[perm[pos]] = pos;
  return rank;
}

}  // namespace

FeasibilityResult bjr_feasible(const ApprovalMatrix& matrix, const FeasibilityQuery& query,
                               const DistanceIndex* diversity) {
  if (query.trials < 1) throw std::invalid_argument("trials must be at least 1");
  if (query.demands.empty()) return {true, {}, 0};
  const std::size_t n = matrix.n_users();
  const std::size_t m = matrix.n_opinions();

  auto demands = query.demands;
  std::sort(demands.begin(), demands.end(), std::greater<>());

  std::vector<bool> start_pool(n, false);
  for (UserIndex u : query.unmatched) start_pool.at(u) = true;
  std::vector<bool> start_candidates(m, false);
  for (OpinionIndex i : query.candidates) start_candidates.at(i) = true;

  std::vector<bool> chosen(m, false);
  for (OpinionIndex i : query.selected) chosen.at(i) = true;
  std::vector<std::size_t> start_residual(n, 0);
  for (UserIndex u = 0; u < n; ++u) {
    const auto row = matrix.row(u);
    for (OpinionIndex i = 0; i < m; ++i) {
      if (row[i] != 0 && !chosen[i]) ++start_residual[u];
    }
  }

  FeasibilityResult result;
  for (std::size_t trial = 0; trial < query.trials; ++trial) {
    ++result.trials_run;
    auto pool = start_pool;
    auto candidates = start_candidates;
    auto residual = start_residual;

    std::vector<std::size_t> opinion_rank;
    std::vector<std::size_t> user_rank;
    const DistanceIndex* tie_index = diversity;
    if (trial > 0) {
      Rng rng(mix_seed(query.seed, trial));
      opinion_rank = shuffled_ranks(m, rng);
      user_rank = shuffled_ranks(n, rng);
      tie_index = nullptr;
    }

    std::vector<ScheduledSlot> schedule;
    bool failed = false;
    for (std::size_t demand : demands) {
      const auto pick =
          detail::pick_stage1(matrix, candidates, pool, demand, tie_index, opinion_rank);
      if (!pick) {
        failed = true;
        break;
      }
      const OpinionIndex p = *pick;
      candidates[p] = false;
      for (UserIndex u = 0; u < n; ++u) {
        if (matrix.approves(u, p) && !chosen[p]) --residual[u];
      }
      auto users = detail::take_approvers(matrix, p, pool, residual, demand, user_rank);
      for (UserIndex u : users) pool[u] = false;
      schedule.push_back({p, demand, std::move(users)});
    }
    if (!failed) {
      result.feasible = true;
      result.schedule = std::move(schedule);
      return result;
    }
  }
  return result;
}

}  // namespace opsel
