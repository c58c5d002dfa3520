#include <gtest/gtest.h>

#include <set>

#include "opsel/selectors.hpp"
#include "support.hpp"

using namespace opsel;
namespace t = opsel::testing;

namespace {

// A feasible schedule must use distinct candidates, serve each demand with
// exactly that many distinct unmatched approvers, and never reuse a user.
void expect_valid_schedule(const ApprovalMatrix& matrix, const FeasibilityQuery& q,
                           const FeasibilityResult& r) {
  ASSERT_TRUE(r.feasible);
  ASSERT_EQ(r.schedule.size(), q.demands.size());
  const std::set<OpinionIndex> cand(q.candidates.begin(), q.candidates.end());
  const std::set<UserIndex> pool(q.unmatched.begin(), q.unmatched.end());
  std::set<OpinionIndex> used_opinions;
  std::set<UserIndex> used_users;
  std::multiset<std::size_t> demands(q.demands.begin(), q.demands.end());
  for (const auto& slot : r.schedule) {
    EXPECT_TRUE(cand.count(slot.opinion));
    EXPECT_TRUE(used_opinions.insert(slot.opinion).second);
    EXPECT_EQ(slot.users.size(), slot.demand);
    auto it = demands.find(slot.demand);
    ASSERT_NE(it, demands.end());
    demands.erase(it);
    for (auto u : slot.users) {
      EXPECT_TRUE(pool.count(u));
      EXPECT_TRUE(matrix.approves(u, slot.opinion));
      EXPECT_TRUE(used_users.insert(u).second);
    }
  }
}

}  // namespace

TEST(Feasibility, DirectFill) {
  const auto m = ApprovalMatrix::from_rows({{1, 0}, {0, 0}});
  FeasibilityQuery q{{0, 1}, {0}, {1}, {}, 5, 0};
  const auto r = bjr_feasible(m, q);
  expect_valid_schedule(m, q, r);
  EXPECT_EQ(r.schedule[0].users, (std::vector<UserIndex>{0}));
}

TEST(Feasibility, DemandTooLarge) {
  const auto m = ApprovalMatrix::from_rows({{1, 0}, {0, 1}, {0, 0}});
  FeasibilityQuery q{{0, 1, 2}, {0, 1}, {2}, {}, 5, 0};
  const auto r = bjr_feasible(m, q);
  EXPECT_FALSE(r.feasible);
  EXPECT_EQ(r.trials_run, 5u);
}

TEST(Feasibility, ToyAfterFirstRound) {
  // m0 chosen, {u0,u1} matched; m1 hypothetically excluded.
  const auto m = ApprovalMatrix::from_rows(t::toy_rows());
  FeasibilityQuery q{{2}, {2}, {1}, {0}, 5, 0};
  const auto r = bjr_feasible(m, q);
  expect_valid_schedule(m, q, r);
  EXPECT_EQ(r.schedule[0].opinion, 2u);
  EXPECT_EQ(r.trials_run, 1u);
}

TEST(Feasibility, ZeroDemandsAlwaysFeasible) {
  const auto m = ApprovalMatrix::from_rows({{0, 0}});
  FeasibilityQuery q{{}, {0, 1}, {0, 0}, {}, 3, 1};
  expect_valid_schedule(m, q, bjr_feasible(m, q));
  FeasibilityQuery empty{{0}, {}, {}, {}, 3, 1};
  EXPECT_TRUE(bjr_feasible(m, empty).feasible);
}

TEST(Feasibility, SchedulesAreConstructive) {
  Rng rng(41);
  int feasible = 0;
  for (int trial = 0; trial < 300; ++trial) {
    const auto n = t::between(rng, 2, 12);
    const auto mm = t::between(rng, 2, 8);
    const auto matrix = ApprovalMatrix::from_rows(t::random_rows(rng, n, mm, 0.5));
    FeasibilityQuery q;
    for (UserIndex u = 0; u < n; ++u) {
      if (rng.uniform() < 0.8) q.unmatched.push_back(u);
    }
    q.candidates = t::random_subset(rng, mm, t::between(rng, 1, mm));
    const auto slots = t::between(rng, 1, q.candidates.size());
    for (std::size_t s = 0; s < slots; ++s) q.demands.push_back(t::between(rng, 0, 3));
    q.trials = 3;
    q.seed = static_cast<std::uint64_t>(trial);
    const DistanceIndex index(matrix, 0.5);
    for (const DistanceIndex* div : {static_cast<const DistanceIndex*>(nullptr), &index}) {
      const auto r = bjr_feasible(matrix, q, div);
      if (r.feasible) {
        ++feasible;
        expect_valid_schedule(matrix, q, r);
      } else {
        EXPECT_TRUE(r.schedule.empty());
      }
      ASSERT_GE(r.trials_run, 1u);
      ASSERT_LE(r.trials_run, q.trials);
    }
  }
  EXPECT_GT(feasible, 0);
}
