#include "opsel/model.hpp"

#include <algorithm>
#include <set>

namespace opsel {

ApprovalMatrix::ApprovalMatrix(std::size_t n_users, std::size_t n_opinions,
                               std::vector<std::uint8_t> cells)
    : n_users_(n_users), n_opinions_(n_opinions), cells_(std::move(cells)) {
  if (n_users_ == 0 || n_opinions_ == 0) {
    throw std::invalid_argument("approval matrix needs at least one user and one opinion");
  }
  if (cells_.size() != n_users_ * n_opinions_) {
    throw std::invalid_argument("approval matrix cell count does not match n_users * n_opinions");
  }
}

ApprovalMatrix ApprovalMatrix::from_rows(const std::vector<std::vector<int>>& rows) {
  if (rows.empty() || rows.front().empty()) {
    throw std::invalid_argument("approval matrix needs at least one user and one opinion");
  }
  const std::size_t m = rows.front().size();
  std::vector<std::uint8_t> cells;
  cells.reserve(rows.size() * m);
  for (const auto& row : rows) {
    if (row.size() != m) throw std::invalid_argument("ragged approval matrix rows");
    for (int v : row) cells.push_back(static_cast<std::uint8_t>(v));
  }
  return ApprovalMatrix(rows.size(), m, std::move(cells));
}

bool ApprovalMatrix::is_binary() const {
  return std::all_of(cells_.begin(), cells_.end(),
                     [](std::uint8_t c) { return c <= 1; });
}

GroupPartition GroupPartition::from_labels(const std::vector<std::string>& labels) {
  GroupPartition partition;
  for (UserIndex u = 0; u < labels.size(); ++u) {
    auto it = std::find(partition.names.begin(), partition.names.end(), labels[u]);
    if (it == partition.names.end()) {
      partition.names.push_back(labels[u]);
      partition.members.push_back({u});
    } else {
      partition.members[static_cast<std::size_t>(it - partition.names.begin())].push_back(u);
    }
  }
  return partition;
}

GroupPartition GroupPartition::from_labels(const std::vector<std::string>& labels,
                                           const std::vector<std::string>& order) {
  std::vector<std::vector<UserIndex>> buckets(order.size());
  for (UserIndex u = 0; u < labels.size(); ++u) {
    auto it = std::find(order.begin(), order.end(), labels[u]);
    if (it == order.end()) throw DataError("unknown group label '" + labels[u] + "'");
    buckets[static_cast<std::size_t>(it - order.begin())].push_back(u);
  }
  GroupPartition partition;
  for (std::size_t g = 0; g < order.size(); ++g) {
    if (buckets[g].empty()) continue;
    partition.names.push_back(order[g]);
    partition.members.push_back(std::move(buckets[g]));
  }
  return partition;
}

std::vector<std::optional<std::size_t>> GroupPartition::labels(std::size_t n_users) const {
  std::vector<std::optional<std::size_t>> out(n_users);
  for (std::size_t g = 0; g < members.size(); ++g) {
    for (UserIndex u : members[g]) {
      if (u < n_users && !out[u]) out[u] = g;
    }
  }
  return out;
}

bool ValidationReport::has(std::string_view needle) const {
  return std::any_of(violations.begin(), violations.end(), [&](const std::string& v) {
    return v.find(needle) != std::string::npos;
  });
}

ValidationReport validate_instance(const Instance& instance) {
  ValidationReport report;
  const auto& matrix = instance.matrix;
  const std::size_t n = matrix.n_users();
  const std::size_t m = matrix.n_opinions();

  if (!matrix.is_binary()) report.violations.push_back("non-binary cells");
  if (instance.k < 1 || instance.k > m) report.violations.push_back("k out of range");

  if (instance.groups) {
    const auto& groups = *instance.groups;
    if (groups.size() == 0) report.violations.push_back("empty partition");
    if (groups.names.size() != groups.members.size()) {
      report.violations.push_back("partition names and members differ in length");
    }
    std::vector<int> seen(n, 0);
    bool overlap = false;
    bool out_of_range = false;
    for (const auto& group : groups.members) {
      if (group.empty()) report.violations.push_back("empty group");
      for (UserIndex u : group) {
        if (u >= n) {
          out_of_range = true;
          continue;
        }
        if (seen[u]++ > 0) overlap = true;
      }
    }
    if (overlap) report.violations.push_back("overlap");
    if (out_of_range) report.violations.push_back("group member out of range");
    if (std::count(seen.begin(), seen.end(), 0) > 0) {
      report.violations.push_back("uncovered user");
    }
  }

  if (instance.opinion_texts && instance.opinion_texts->size() != m) {
    report.violations.push_back("opinion_texts length mismatch");
  }
  if (!instance.user_ids.empty() && instance.user_ids.size() != n) {
    report.violations.push_back("user_ids length mismatch");
  }
  if (!instance.opinion_ids.empty() && instance.opinion_ids.size() != m) {
    report.violations.push_back("opinion_ids length mismatch");
  }
  return report;
}

void require_valid(const Instance& instance) {
  auto report = validate_instance(instance);
  if (report.ok()) return;
  std::string message = "invalid instance '" + instance.question_id + "':";
  for (const auto& v : report.violations) message += " " + v + ";";
  throw DataError(message);
}

std::string_view to_string(Rule rule) {
  switch (rule) {
    case Rule::random: return "random";
    case Rule::engagement: return "engagement";
    case Rule::bridging: return "bridging";
    case Rule::diversity: return "diversity";
    case Rule::jr: return "jr";
    case Rule::bjr: return "bjr";
    case Rule::diverse_bjr: return "diverse_bjr";
  }
  return "unknown";
}

Rule parse_rule(std::string_view text) {
  std::string normalized(text);
  std::replace(normalized.begin(), normalized.end(), '-', '_');
  for (Rule rule : kAllRules) {
    if (to_string(rule) == normalized) return rule;
  }
  throw std::invalid_argument("unknown rule '" + std::string(text) + "'");
}

std::vector<std::string> selection_violations(const Selection& selection,
                                              std::size_t n_opinions, std::size_t k) {
  std::vector<std::string> out;
  if (selection.opinions.size() != k) out.push_back("selection size differs from k");
  std::set<OpinionIndex> seen;
  for (OpinionIndex i : selection.opinions) {
    if (i >= n_opinions) out.push_back("opinion index out of range");
    if (!seen.insert(i).second) out.push_back("duplicate opinion index");
  }
  return out;
}

}  // namespace opsel
