#pragma once

#include <cstdint>
#include <span>
#include <string>
#include <vector>

#include "opsel/model.hpp"

namespace opsel {

// Additive per-opinion scores: the score of a set is the sum of its members.
struct ScoreVector {
  std::vector<double> scores;
  std::string rule;

  double operator[](OpinionIndex i) const { return scores[i]; }
  std::size_t size() const { return scores.size(); }
};

// Number of approvals per opinion.
ScoreVector engagement_scores(const ApprovalMatrix& matrix);

// Minimum per-group approval fraction (cross-group agreement).
ScoreVector cga_scores(const ApprovalMatrix& matrix, const GroupPartition& groups);

// Approvals among `uncovered` users only. uncovered[u] marks user u.
ScoreVector coverage_scores(const ApprovalMatrix& matrix, const std::vector<bool>& uncovered);

// Uniform [0,1) scores from Rng(seed), one draw per opinion in index order.
ScoreVector random_scores(std::size_t n_opinions, std::uint64_t seed);

double set_score(const ScoreVector& scores, std::span<const OpinionIndex> set);

// Indices ordered by descending score; equal scores keep lowest index first.
std::vector<OpinionIndex> rank_descending(std::span<const double> scores);

// Best-scoring candidate, lowest index on ties. `candidates` must be non-empty.
OpinionIndex argmax_among(std::span<const double> scores,
                          std::span<const OpinionIndex> candidates);

}  // namespace opsel
