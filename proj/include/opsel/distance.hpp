#pragma once

#include <filesystem>
#include <span>
#include <vector>

#include "opsel/model.hpp"

namespace opsel {

enum class DistanceKind { hamming, jaccard };

// Normalized Hamming distance between opinion columns i and j: the fraction
// of users on which they disagree. Throws std::out_of_range on bad indices.
double hamming(const ApprovalMatrix& matrix, OpinionIndex i, OpinionIndex j);

// 1 - |a & b| / |a | b|; two all-zero columns are at distance 0.
double jaccard(const ApprovalMatrix& matrix, OpinionIndex i, OpinionIndex j);

// Pairwise opinion distances plus the epsilon-neighbor graph.
//
// Distances are stored as doubles computed as count / n (or count / union for
// Jaccard). Neighbor tests use `d <= epsilon` with no tolerance: an integer
// ratio is correctly rounded by IEEE division, and so is a decimal literal
// such as 0.8, so whenever epsilon equals the exact ratio both round to the
// same double and compare equal.
class DistanceIndex {
 public:
  DistanceIndex(const ApprovalMatrix& matrix, double epsilon,
                DistanceKind kind = DistanceKind::hamming);

  std::size_t size() const { return m_; }
  double epsilon() const { return epsilon_; }
  DistanceKind kind() const { return kind_; }

  double operator()(OpinionIndex i, OpinionIndex j) const { return dist_[i * m_ + j]; }
  std::span<const double> row(OpinionIndex i) const { return {dist_.data() + i * m_, m_}; }

  bool are_neighbors(OpinionIndex i, OpinionIndex j) const {
    return i != j && dist_[i * m_ + j] <= epsilon_;
  }
  const std::vector<OpinionIndex>& neighbors(OpinionIndex i) const { return neighbors_[i]; }

  // Same distances, neighbor graph re-thresholded at a new epsilon.
  DistanceIndex with_epsilon(double epsilon) const;

 private:
  DistanceIndex() = default;
  void rebuild_neighbors();

  std::size_t m_ = 0;
  double epsilon_ = 0.0;
  DistanceKind kind_ = DistanceKind::hamming;
  std::vector<double> dist_;
  std::vector<std::vector<OpinionIndex>> neighbors_;
};

DistanceIndex build_distance_index(const ApprovalMatrix& matrix, double epsilon,
                                   DistanceKind kind = DistanceKind::hamming);

// Connected components of the epsilon-neighbor graph restricted to the
// selected opinions. Groups appear in order of their first member in
// `selection`; members keep selection order.
std::vector<std::vector<OpinionIndex>> clone_groups(std::span<const OpinionIndex> selection,
                                                    const DistanceIndex& index);

// m x m CSV with an "opinion" header column, for external plotting.
void write_distance_csv(const DistanceIndex& index, const std::filesystem::path& path);

}  // namespace opsel
