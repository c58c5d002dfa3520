#pragma once

// Core data model shared by every selector and metric: the binary approval
// matrix, the optional partition of users into groups, the selection
// instance, and the result types produced by the selectors.

#include <cstddef>
#include <cstdint>
#include <map>
#include <optional>
#include <span>
#include <stdexcept>
#include <string>
#include <string_view>
#include <vector>

namespace opsel {

// Users and opinions are dense 0-based indices. External identifiers live in
// Instance metadata only.
using UserIndex = std::size_t;
using OpinionIndex = std::size_t;

// Raised when a rule or metric needs a group partition the instance lacks.
class MissingPartition : public std::invalid_argument {
 public:
  using std::invalid_argument::invalid_argument;
};

// Malformed input data (files, tables, instance documents).
class DataError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

// Dense n x m matrix of approvals, stored row-major. Cells are kept as given
// so that validate_instance can report non-binary entries; every algorithm
// reads a cell through approves().
class ApprovalMatrix {
 public:
  ApprovalMatrix(std::size_t n_users, std::size_t n_opinions,
                 std::vector<std::uint8_t> cells);

  // Rows are users, columns opinions. Throws std::invalid_argument on ragged
  // or empty input.
  static ApprovalMatrix from_rows(const std::vector<std::vector<int>>& rows);

  std::size_t n_users() const { return n_users_; }
  std::size_t n_opinions() const { return n_opinions_; }

  std::uint8_t cell(UserIndex u, OpinionIndex i) const {
    return cells_[u * n_opinions_ + i];
  }
  bool approves(UserIndex u, OpinionIndex i) const { return cell(u, i) != 0; }

  std::span<const std::uint8_t> row(UserIndex u) const {
    return {cells_.data() + u * n_opinions_, n_opinions_};
  }
  std::span<const std::uint8_t> cells() const { return cells_; }

  bool is_binary() const;

  friend bool operator==(const ApprovalMatrix&, const ApprovalMatrix&) = default;

 private:
  std::size_t n_users_;
  std::size_t n_opinions_;
  std::vector<std::uint8_t> cells_;
};

// Partition of users into named groups G_1..G_gamma. Construction does not
// enforce the partition invariants; validate_instance reports them.
struct GroupPartition {
  std::vector<std::string> names;
  std::vector<std::vector<UserIndex>> members;

  std::size_t size() const { return members.size(); }

  // Groups in first-appearance order of the labels.
  static GroupPartition from_labels(const std::vector<std::string>& labels);
  // Groups in the given order; labels outside `order` throw DataError.
  // Empty groups are dropped.
  static GroupPartition from_labels(const std::vector<std::string>& labels,
                                    const std::vector<std::string>& order);

  // Per-user group position, or nullopt when the user is not covered.
  std::vector<std::optional<std::size_t>> labels(std::size_t n_users) const;

  friend bool operator==(const GroupPartition&, const GroupPartition&) = default;
};

struct Instance {
  ApprovalMatrix matrix;
  std::size_t k = 1;
  std::optional<GroupPartition> groups;
  std::string question_id;
  std::optional<std::vector<std::string>> opinion_texts;
  // External identifiers, aligned to user / opinion indices when present.
  std::vector<std::string> user_ids;
  std::vector<std::string> opinion_ids;

  std::size_t n_users() const { return matrix.n_users(); }
  std::size_t n_opinions() const { return matrix.n_opinions(); }

  friend bool operator==(const Instance&, const Instance&) = default;
};

struct ValidationReport {
  std::vector<std::string> violations;

  bool ok() const { return violations.empty(); }
  bool has(std::string_view needle) const;
};

ValidationReport validate_instance(const Instance& instance);

// Throws DataError listing every violation when the instance is invalid.
void require_valid(const Instance& instance);

enum class Rule { random, engagement, bridging, diversity, jr, bjr, diverse_bjr };

inline constexpr Rule kAllRules[] = {Rule::random, Rule::engagement,
                                     Rule::bridging, Rule::diversity,
                                     Rule::jr,     Rule::bjr,
                                     Rule::diverse_bjr};

std::string_view to_string(Rule rule);
// Accepts both "diverse_bjr" and "diverse-bjr" spellings.
Rule parse_rule(std::string_view text);

struct Selection {
  std::vector<OpinionIndex> opinions;  // pick order
  Rule rule = Rule::random;
  std::optional<std::uint64_t> seed;
  std::map<std::string, double> params;

  std::size_t k() const { return opinions.size(); }

  friend bool operator==(const Selection&, const Selection&) = default;
};

// Checks distinctness, range and size; returns the violations.
std::vector<std::string> selection_violations(const Selection& selection,
                                              std::size_t n_opinions,
                                              std::size_t k);

// Balanced user -> selected-opinion map. budgets[j] is the capacity of
// selection.opinions[j]; assignment[u] is an opinion index.
struct AssignmentCertificate {
  std::vector<OpinionIndex> assignment;
  std::vector<std::size_t> budgets;

  friend bool operator==(const AssignmentCertificate&,
                         const AssignmentCertificate&) = default;
};

}  // namespace opsel
