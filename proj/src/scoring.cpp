#include "opsel/scoring.hpp"

#include <algorithm>
#include <numeric>
#include <stdexcept>

#include "opsel/rng.hpp"

namespace opsel {

ScoreVector engagement_scores(const ApprovalMatrix& matrix) {
  ScoreVector out{std::vector<double>(matrix.n_opinions(), 0.0), "engagement"};
  for (UserIndex u = 0; u < matrix.n_users(); ++u) {
    const auto row = matrix.row(u);
    for (OpinionIndex i = 0; i < row.size(); ++i) {
      if (row[i] != 0) out.scores[i] += 1.0;
    }
  }
  return out;
}

ScoreVector cga_scores(const ApprovalMatrix& matrix, const GroupPartition& groups) {
  if (groups.size() == 0) throw MissingPartition("cross-group agreement needs a group partition");
  const std::size_t m = matrix.n_opinions();
  ScoreVector out{std::vector<double>(m, 1.0), "bridging"};
  std::vector<std::size_t> count(m);
  for (const auto& group : groups.members) {
    if (group.empty()) continue;
    std::fill(count.begin(), count.end(), 0);
    for (UserIndex u : group) {
      const auto row = matrix.row(u);
      for (OpinionIndex i = 0; i < m; ++i) count[i] += row[i] != 0 ? 1 : 0;
    }
    const double size = static_cast<double>(group.size());
    for (OpinionIndex i = 0; i < m; ++i) {
      out.scores[i] = std::min(out.scores[i], static_cast<double>(count[i]) / size);
    }
  }
  return out;
}

ScoreVector coverage_scores(const ApprovalMatrix& matrix, const std::vector<bool>& uncovered) {
  if (uncovered.size() != matrix.n_users()) {
    throw std::invalid_argument("uncovered mask must have one entry per user");
  }
  ScoreVector out{std::vector<double>(matrix.n_opinions(), 0.0), "coverage"};
  for (UserIndex u = 0; u < matrix.n_users(); ++u) {
    if (!uncovered[u]) continue;
    const auto row = matrix.row(u);
    for (OpinionIndex i = 0; i < row.size(); ++i) {
      if (row[i] != 0) out.scores[i] += 1.0;
    }
  }
  return out;
}

ScoreVector random_scores(std::size_t n_opinions, std::uint64_t seed) {
  Rng rng(seed);
  ScoreVector out{std::vector<double>(n_opinions), "random"};
  for (auto& s : out.scores) s = rng.uniform();
  return out;
}

double set_score(const ScoreVector& scores, std::span<const OpinionIndex> set) {
  double total = 0.0;
  for (OpinionIndex i : set) total += scores[i];
  return total;
}

std::vector<OpinionIndex> rank_descending(std::span<const double> scores) {
  std::vector<OpinionIndex> order(scores.size());
  std::iota(order.begin(), order.end(), OpinionIndex{0});
  std::stable_sort(order.begin(), order.end(),
                   [&](OpinionIndex a, OpinionIndex b) { return scores[a] > scores[b]; });
  return order;
}

OpinionIndex argmax_among(std::span<const double> scores,
                          std::span<const OpinionIndex> candidates) {
  if (candidates.empty()) throw std::invalid_argument("argmax over an empty candidate set");
  OpinionIndex best = candidates.front();
  for (OpinionIndex i : candidates) {
    if (scores[i] > scores[best] || (scores[i] == scores[best] && i < best)) best = i;
  }
  return best;
}

}  // namespace opsel
