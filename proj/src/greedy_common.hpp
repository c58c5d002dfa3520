#pragma once

// Building blocks shared by the balanced selectors and the feasibility
// checker, so that the simulator follows the same tie-break and voter
// removal rules as the main loop.

#include <optional>
#include <span>
#include <vector>

#include "opsel/distance.hpp"
#include "opsel/model.hpp"

namespace opsel::detail {

inline constexpr std::size_t kUnassigned = static_cast<std::size_t>(-1);

// Approvers of every opinion among the users flagged in `pool`; entries for
// opinions not flagged in `available` are left at zero.
std::vector<std::size_t> pool_coverage(const ApprovalMatrix& matrix,
                                       const std::vector<bool>& available,
                                       const std::vector<bool>& pool);

// Users in `pool` approving `opinion` and none of its epsilon-neighbors.
std::size_t unique_approvers(const ApprovalMatrix& matrix, const DistanceIndex& index,
                             OpinionIndex opinion, const std::vector<bool>& pool);

// Stage-1 pick: among available opinions with at least `demand` approvers in
// the pool, maximum coverage wins; ties go to fewer epsilon-neighbors, then
// more unique approvers (only when `diversity` is set), then to the lowest
// `rank` (opinion index when `rank` is empty).
std::optional<OpinionIndex> pick_stage1(const ApprovalMatrix& matrix,
                                        const std::vector<bool>& available,
                                        const std::vector<bool>& pool, std::size_t demand,
                                        const DistanceIndex* diversity,
                                        std::span<const std::size_t> rank = {});

// Up to `limit` pool users approving `opinion`, lowest residual degree first,
// then lowest `rank` (user index when empty).
std::vector<UserIndex> take_approvers(const ApprovalMatrix& matrix, OpinionIndex opinion,
                                      const std::vector<bool>& pool,
                                      const std::vector<std::size_t>& residual_degree,
                                      std::size_t limit,
                                      std::span<const std::size_t> rank = {});

// Assigns every still-unassigned user to a slot with spare capacity. A
// maximum matching of leftover users to slots they approve is found first
// (augmenting paths, users in index order, slots by lowest opinion index);
// users left over after that take the lowest-index slot with room.
void complete_assignment(const ApprovalMatrix& matrix,
                         std::span<const OpinionIndex> slate,
                         std::span<const std::size_t> budgets,
                         std::vector<std::size_t>& slot_fill,
                         std::vector<OpinionIndex>& assignment);

}  // namespace opsel::detail
