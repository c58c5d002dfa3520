#pragma once

#include <optional>
#include <span>
#include <vector>

#include "opsel/distance.hpp"
#include "opsel/model.hpp"

namespace opsel {

struct MetricsReport {
  double u_all = 0.0;                  // percent
  std::optional<double> median_u;      // percent; needs a partition
  std::optional<double> consensus;     // fraction; needs a partition
  double coverage_gap = 0.0;
  double redundancy = 0.0;
  double redundancy_epsilon = 0.0;
};

// Percentage of users approving none of the selected opinions.
double unrepresented_overall(const ApprovalMatrix& matrix, std::span<const OpinionIndex> selection);

// Per-group unrepresentation percentages, in partition order.
std::vector<double> unrepresented_by_group(const ApprovalMatrix& matrix,
                                           std::span<const OpinionIndex> selection,
                                           const GroupPartition& groups);

// Median of the per-group values; an even group count takes the midpoint of
// the two central values.
double unrepresented_median_group(const ApprovalMatrix& matrix,
                                  std::span<const OpinionIndex> selection,
                                  const GroupPartition& groups);

// max over selected s of min over groups of the group's approval share of s.
double consensus(const ApprovalMatrix& matrix, std::span<const OpinionIndex> selection,
                 const GroupPartition& groups);

// max over unselected o of the distance to the nearest selected opinion;
// 0 when every opinion is selected.
double coverage_gap(std::span<const OpinionIndex> selection, const DistanceIndex& index);

// sum over clone groups of (|C| - 1), divided by k. Uses the index's epsilon.
double redundancy(std::span<const OpinionIndex> selection, const DistanceIndex& index);

// All five metrics; the partition-based ones are left empty when the
// instance has no groups. `redundancy_index` carries the metric epsilon.
MetricsReport compute_metrics(const Instance& instance, std::span<const OpinionIndex> selection,
                              const DistanceIndex& redundancy_index);

}  // namespace opsel
