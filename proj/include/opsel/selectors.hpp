#pragma once

// Selection rules. Every selector returns exactly k distinct opinion indices
// and is a pure function of (instance, config): ties are broken by lowest
// opinion index and the only randomness is the seeded score vector.

#include <cstdint>
#include <optional>
#include <vector>

#include "opsel/distance.hpp"
#include "opsel/model.hpp"

namespace opsel {

enum class TieBreak { lowest_index };

struct SelectorConfig {
  Rule rule = Rule::engagement;
  std::size_t k = 1;
  std::uint64_t seed = 0;
  double epsilon = 0.8;    // diverse_bjr neighbor threshold
  std::size_t trials = 5;  // feasibility-checker trials T
  TieBreak tie_break = TieBreak::lowest_index;
};

// Throws std::invalid_argument when k, epsilon or trials are out of range
// for an instance with `n_opinions` opinions.
void check_config(const SelectorConfig& config, std::size_t n_opinions);

// Per-slot capacities: floor(n/k)+1 for the first n mod k slots, floor(n/k)
// for the rest.
std::vector<std::size_t> bjr_budgets(std::size_t n_users, std::size_t k);

struct SelectionResult {
  Selection selection;
  std::optional<AssignmentCertificate> certificate;  // bjr and diverse_bjr only
};

Selection select_random(const Instance& instance, const SelectorConfig& config);
Selection select_engagement(const Instance& instance, const SelectorConfig& config);
Selection select_bridging(const Instance& instance, const SelectorConfig& config);

// Farthest-first traversal started from the 1-center.
Selection select_diversity(const Instance& instance, const SelectorConfig& config,
                           const DistanceIndex& index);

// Two-stage greedy with coverage threshold ceil(n/k); Stage 2 fills by
// random_scores(seed).
Selection select_jr(const Instance& instance, const SelectorConfig& config);

// Balanced greedy with per-slot budgets and residual-degree voter removal.
SelectionResult select_bjr(const Instance& instance, const SelectorConfig& config);

// Balanced greedy with epsilon-neighbor tie-breaks in Stage 1 and
// feasibility-gated Stage-2 ineligibility. `index` supplies the neighbor
// graph; its epsilon is used as-is.
SelectionResult select_diverse_bjr(const Instance& instance, const SelectorConfig& config,
                                   const DistanceIndex& index);

// Dispatches on config.rule. `index` is used by diversity and diverse_bjr and
// must have been built with config.epsilon for diverse_bjr; when null one is
// built on the fly.
SelectionResult select(const Instance& instance, const SelectorConfig& config,
                       const DistanceIndex* index = nullptr);

// Greedy balanced assignment for a fixed slate: slots are served in slate
// order, each taking up to its budget of unmatched approvers (lowest residual
// degree first), and leftover users fill remaining capacity by lowest opinion
// index. Used to certify slates that were not produced by a BJR selector.
AssignmentCertificate greedy_certificate(const ApprovalMatrix& matrix,
                                         std::span<const OpinionIndex> slate);

// ---------------------------------------------------------------------------
// Feasibility checker

struct FeasibilityQuery {
  std::vector<UserIndex> unmatched;
  std::vector<OpinionIndex> candidates;
  std::vector<std::size_t> demands;
  // Already-chosen opinions; they do not count toward residual degree.
  std::vector<OpinionIndex> selected;
  std::size_t trials = 5;
  std::uint64_t seed = 0;
};

struct ScheduledSlot {
  OpinionIndex opinion;
  std::size_t demand;
  std::vector<UserIndex> users;
};

struct FeasibilityResult {
  bool feasible = false;
  std::vector<ScheduledSlot> schedule;  // filled only when feasible
  std::size_t trials_run = 0;
};

// Greedy simulation of the remaining rounds, largest demand first. Trial 1
// uses the main algorithm's deterministic tie-break (diversity keys when
// `diversity` is given); later trials break ties randomly from the seed.
// `false` is inconclusive, not a proof of infeasibility.
FeasibilityResult bjr_feasible(const ApprovalMatrix& matrix, const FeasibilityQuery& query,
                               const DistanceIndex* diversity = nullptr);

}  // namespace opsel
