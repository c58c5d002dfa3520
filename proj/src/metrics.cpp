#include "opsel/metrics.hpp"

#include <algorithm>
#include <limits>
#include <stdexcept>

namespace opsel {
namespace {

void require_nonempty(std::span<const OpinionIndex> selection) {
  if (selection.empty()) throw std::invalid_argument("metrics need a non-empty selection");
}

bool represented(const ApprovalMatrix& matrix, UserIndex u,
                 std::span<const OpinionIndex> selection) {
  return std::any_of(selection.begin(), selection.end(),
                     [&](OpinionIndex s) { return matrix.approves(u, s); });
}

}  // namespace

double unrepresented_overall(const ApprovalMatrix& matrix,
                             std::span<const OpinionIndex> selection) {
  require_nonempty(selection);
  std::size_t missing = 0;
  for (UserIndex u = 0; u < matrix.n_users(); ++u) {
    if (!represented(matrix, u, selection)) ++missing;
  }
  return 100.0 * static_cast<double>(missing) / static_cast<double>(matrix.n_users());
}

std::vector<double> unrepresented_by_group(const ApprovalMatrix& matrix,
                                           std::span<const OpinionIndex> selection,
                                           const GroupPartition& groups) {
  require_nonempty(selection);
  if (groups.size() == 0) throw MissingPartition("group metrics need a group partition");
  std::vector<double> out;
  out.reserve(groups.size());
  for (const auto& group : groups.members) {
    if (group.empty()) continue;
    std::size_t missing = 0;
    for (UserIndex u : group) {
      if (!represented(matrix, u, selection)) ++missing;
    }
    out.push_back(100.0 * static_cast<double>(missing) / static_cast<double>(group.size()));
  }
  return out;
}

double unrepresented_median_group(const ApprovalMatrix& matrix,
                                  std::span<const OpinionIndex> selection,
                                  const GroupPartition& groups) {
  auto values = unrepresented_by_group(matrix, selection, groups);
  std::sort(values.begin(), values.end());
  const std::size_t mid = values.size() / 2;
  if (values.size() % 2 == 1) return values[mid];
  return (values[mid - 1] + values[mid]) / 2.0;
}

double consensus(const ApprovalMatrix& matrix, std::span<const OpinionIndex> selection,
                 const GroupPartition& groups) {
  require_nonempty(selection);
  if (groups.size() == 0) throw MissingPartition("consensus needs a group partition");
  double best = 0.0;
  for (OpinionIndex s : selection) {
    double worst = 1.0;
    for (const auto& group : groups.members) {
      if (group.empty()) continue;
      std::size_t approve = 0;
      for (UserIndex u : group) approve += matrix.approves(u, s) ? 1 : 0;
      worst = std::min(worst, static_cast<double>(approve) / static_cast<double>(group.size()));
    }
    best = std::max(best, worst);
  }
  return best;
}

double coverage_gap(std::span<const OpinionIndex> selection, const DistanceIndex& index) {
  require_nonempty(selection);
  std::vector<bool> chosen(index.size(), false);
  for (OpinionIndex s : selection) chosen.at(s) = true;
  double gap = 0.0;
  for (OpinionIndex o = 0; o < index.size(); ++o) {
    if (chosen[o]) continue;
    double nearest = std::numeric_limits<double>::infinity();
    for (OpinionIndex s : selection) nearest = std::min(nearest, index(o, s));
    gap = std::max(gap, nearest);
  }
  return gap;
}

double redundancy(std::span<const OpinionIndex> selection, const DistanceIndex& index) {
  require_nonempty(selection);
  const auto groups = clone_groups(selection, index);
  std::size_t redundant = 0;
  for (const auto& g : groups) redundant += g.size() - 1;
  return static_cast<double>(redundant) / static_cast<double>(selection.size());
}

MetricsReport compute_metrics(const Instance& instance, std::span<const OpinionIndex> selection,
                              const DistanceIndex& redundancy_index) {
  MetricsReport report;
  report.u_all = unrepresented_overall(instance.matrix, selection);
  if (instance.groups) {
    report.median_u = unrepresented_median_group(instance.matrix, selection, *instance.groups);
    report.consensus = consensus(instance.matrix, selection, *instance.groups);
  }
  report.coverage_gap = coverage_gap(selection, redundancy_index);
  report.redundancy = redundancy(selection, redundancy_index);
  report.redundancy_epsilon = redundancy_index.epsilon();
  return report;
}

}  // namespace opsel
