#pragma once

// Exact property checks and small-instance brute-force oracles.
//
// Every "|T| >= n/k" test is done in integers as k * |T| >= n, with k the
// size of the slate being checked.

#include <optional>
#include <span>
#include <stdexcept>
#include <string>
#include <vector>

#include "opsel/distance.hpp"
#include "opsel/model.hpp"

namespace opsel {

// Thrown by the brute-force oracles when the enumeration guard trips.
class EnumerationTooLarge : public std::length_error {
 public:
  using std::length_error::length_error;
};

struct BlockingWitness {
  OpinionIndex opinion;
  std::vector<UserIndex> users;
};

struct JrReport {
  bool satisfied = true;
  std::optional<BlockingWitness> witness;
};

// For each opinion q, the users approving q and nothing in the slate; JR
// fails iff some such set reaches n/k. The witness is the first q in index
// order.
JrReport check_jr(const ApprovalMatrix& matrix, std::span<const OpinionIndex> slate);

enum class BjrStatus { satisfied, violated, malformed };

struct BjrReport {
  BjrStatus status = BjrStatus::satisfied;
  std::optional<BlockingWitness> witness;  // violated only
  std::string reason;                      // malformed only

  bool ok() const { return status == BjrStatus::satisfied; }
  // Balance (clause i) holds: the certificate is well formed.
  bool balanced() const { return status != BjrStatus::malformed; }
};

std::string_view to_string(BjrStatus status);

// Clause (i): the certificate is total, maps into the slate, and each slot
// holds exactly its budget with budgets in {floor(n/k), ceil(n/k)} summing
// to n. Clause (ii) under the given map: a user blocks with q when it
// approves q but not its own assigned opinion, so for each q the maximal
// blocking set is {u : u approves q, u does not approve assignment[u]}.
BjrReport check_bjr_certificate(const ApprovalMatrix& matrix,
                                std::span<const OpinionIndex> slate,
                                const AssignmentCertificate& certificate);

// Whether any balanced total assignment of users to the slate passes clause
// (ii). Guard: n <= 12 and |slate| <= 4, else EnumerationTooLarge.
bool brute_force_bjr_exists(const ApprovalMatrix& matrix, std::span<const OpinionIndex> slate);

// JR decided by enumerating every user subset of size >= n/k that shares an
// approved opinion. Guard: n <= 16.
bool brute_force_jr(const ApprovalMatrix& matrix, std::span<const OpinionIndex> slate);

struct CoverageOptimum {
  double value = 0.0;
  std::vector<OpinionIndex> subset;  // lexicographically first optimum
};

// Exhaustive minimum coverage gap over all k-subsets. Guard: C(m,k) <= 10^6.
CoverageOptimum brute_force_min_cg(const DistanceIndex& index, std::size_t k);

}  // namespace opsel
