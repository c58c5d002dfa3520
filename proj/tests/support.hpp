#pragma once

// Shared fixtures, random generators and independent reference
// implementations for the unit and acceptance tests. Reference code works on
// plain nested vectors so it shares nothing with the library internals.

#include <algorithm>
#include <cstdint>
#include <numeric>
#include <set>
#include <vector>

#include "opsel/data_io.hpp"
#include "opsel/model.hpp"
#include "opsel/rng.hpp"

namespace opsel::testing {

using Rows = std::vector<std::vector<int>>;

// 3 users x 3 opinions used throughout the worked examples.
inline Rows toy_rows() { return {{1, 0, 0}, {1, 1, 0}, {0, 1, 1}}; }

inline Instance toy_instance(std::size_t k = 2) {
  Instance inst{ApprovalMatrix::from_rows(toy_rows()), k, std::nullopt, "toy", std::nullopt, {}, {}};
  inst.groups = GroupPartition{{"a", "b"}, {{0, 1}, {2}}};
  return inst;
}

// alpha, alpha', beta, beta' over 3 users.
inline Rows jr_toy_rows() { return {{1, 1, 0, 0}, {1, 1, 0, 0}, {0, 0, 1, 1}}; }

inline Instance jr_toy_instance(std::size_t k = 3) {
  return Instance{ApprovalMatrix::from_rows(jr_toy_rows()), k, std::nullopt, "toy-jr",
                  std::nullopt, {}, {}};
}

inline Rows random_rows(Rng& rng, std::size_t n, std::size_t m, double density) {
  Rows rows(n, std::vector<int>(m, 0));
  for (auto& r : rows) {
    for (auto& c : r) c = rng.uniform() < density ? 1 : 0;
  }
  return rows;
}

inline std::size_t between(Rng& rng, std::size_t lo, std::size_t hi) {
  return lo + static_cast<std::size_t>(rng.below(hi - lo + 1));
}

// Random instance with n in [1, max_n], m in [1, max_m], k in [1, min(m, max_k)]
// and a random partition into up to 3 groups.
inline Instance random_instance(Rng& rng, std::size_t max_n, std::size_t max_m,
                                std::size_t max_k) {
  const std::size_t n = between(rng, 1, max_n);
  const std::size_t m = between(rng, 1, max_m);
  const std::size_t k = between(rng, 1, std::min(m, max_k));
  const double density = 0.05 + 0.6 * rng.uniform();
  Instance inst{ApprovalMatrix::from_rows(random_rows(rng, n, m, density)), k, std::nullopt,
                "rand", std::nullopt, {}, {}};
  const std::size_t g = between(rng, 1, std::min<std::size_t>(3, n));
  GroupPartition part;
  for (std::size_t i = 0; i < g; ++i) {
    part.names.push_back("g" + std::to_string(i));
    part.members.emplace_back();
  }
  for (std::size_t u = 0; u < n; ++u) part.members[u < g ? u : rng.below(g)].push_back(u);
  for (auto& mem : part.members) std::sort(mem.begin(), mem.end());
  inst.groups = part;
  return inst;
}

inline Rows to_rows(const ApprovalMatrix& matrix) {
  Rows rows(matrix.n_users(), std::vector<int>(matrix.n_opinions()));
  for (std::size_t u = 0; u < matrix.n_users(); ++u) {
    for (std::size_t i = 0; i < matrix.n_opinions(); ++i) rows[u][i] = matrix.cell(u, i);
  }
  return rows;
}

inline std::vector<std::size_t> random_subset(Rng& rng, std::size_t m, std::size_t size) {
  std::vector<std::size_t> all(m);
  std::iota(all.begin(), all.end(), 0);
  for (std::size_t i = 0; i < size; ++i) {
    std::swap(all[i], all[i + rng.below(m - i)]);
  }
  all.resize(size);
  return all;
}

// --- reference implementations -------------------------------------------

inline double ref_hamming(const Rows& rows, std::size_t i, std::size_t j) {
  double diff = 0;
  for (const auto& r : rows) diff += r[i] != r[j];
  return diff / static_cast<double>(rows.size());
}

// Definition-level JR: some q whose approvers outside the slate number >= n/k.
inline bool ref_jr(const Rows& rows, const std::vector<std::size_t>& slate) {
  const double n = static_cast<double>(rows.size());
  const double k = static_cast<double>(slate.size());
  const std::size_t m = rows.front().size();
  for (std::size_t q = 0; q < m; ++q) {
    double count = 0;
    for (const auto& r : rows) {
      bool represented = false;
      for (auto s : slate) represented = represented || r[s] == 1;
      if (r[q] == 1 && !represented) count += 1;
    }
    if (count * k >= n) return false;
  }
  return true;
}

inline double ref_u_all(const Rows& rows, const std::vector<std::size_t>& slate) {
  double miss = 0;
  for (const auto& r : rows) {
    bool any = false;
    for (auto s : slate) any = any || r[s] == 1;
    miss += !any;
  }
  return 100.0 * miss / static_cast<double>(rows.size());
}

inline double ref_coverage_gap(const Rows& rows, const std::vector<std::size_t>& slate) {
  const std::size_t m = rows.front().size();
  const std::set<std::size_t> chosen(slate.begin(), slate.end());
  double worst = 0;
  for (std::size_t o = 0; o < m; ++o) {
    if (chosen.count(o)) continue;
    double best = 1.0;
    for (auto s : slate) best = std::min(best, ref_hamming(rows, o, s));
    worst = std::max(worst, best);
  }
  return worst;
}

}  // namespace opsel::testing
