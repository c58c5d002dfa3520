#include "opsel/distance.hpp"

#include <bit>
#include <cstdint>
#include <fstream>
#include <iomanip>
#include <numeric>
#include <stdexcept>

namespace opsel {
namespace {

void check_index(const ApprovalMatrix& matrix, OpinionIndex i) {
  if (i >= matrix.n_opinions()) {
    throw std::out_of_range("opinion index " + std::to_string(i) + " out of range");
  }
}

// Opinion columns packed 64 users per word.
struct PackedColumns {
  std::size_t words = 0;
  std::vector<std::uint64_t> bits;  // m * words

  explicit PackedColumns(const ApprovalMatrix& matrix)
      : words((matrix.n_users() + 63) / 64),
        bits(matrix.n_opinions() * words, 0) {
    const std::size_t m = matrix.n_opinions();
    for (UserIndex u = 0; u < matrix.n_users(); ++u) {
      const auto row = matrix.row(u);
      const std::uint64_t bit = std::uint64_t{1} << (u % 64);
      for (OpinionIndex i = 0; i < m; ++i) {
        if (row[i] != 0) bits[i * words + u / 64] |= bit;
      }
    }
  }

  const std::uint64_t* column(OpinionIndex i) const { return bits.data() + i * words; }
};

struct PairCounts {
  std::size_t differ = 0;
  std::size_t both = 0;
  std::size_t either = 0;
};

PairCounts count_pair(const PackedColumns& packed, OpinionIndex i, OpinionIndex j) {
  PairCounts c;
  const auto* a = packed.column(i);
  const auto* b = packed.column(j);
  for (std::size_t w = 0; w < packed.words; ++w) {
    c.differ += static_cast<std::size_t>(std::popcount(a[w] ^ b[w]));
    c.both += static_cast<std::size_t>(std::popcount(a[w] & b[w]));
    c.either += static_cast<std::size_t>(std::popcount(a[w] | b[w]));
  }
  return c;
}

double to_distance(const PairCounts& c, std::size_t n, DistanceKind kind) {
  if (kind == DistanceKind::hamming) {
    return static_cast<double>(c.differ) / static_cast<double>(n);
  }
  if (c.either == 0) return 0.0;
  return static_cast<double>(c.either - c.both) / static_cast<double>(c.either);
}

}  // namespace

double hamming(const ApprovalMatrix& matrix, OpinionIndex i, OpinionIndex j) {
  check_index(matrix, i);
  check_index(matrix, j);
  std::size_t differ = 0;
  for (UserIndex u = 0; u < matrix.n_users(); ++u) {
    if (matrix.approves(u, i) != matrix.approves(u, j)) ++differ;
  }
  return static_cast<double>(differ) / static_cast<double>(matrix.n_users());
}

double jaccard(const ApprovalMatrix& matrix, OpinionIndex i, OpinionIndex j) {
  check_index(matrix, i);
  check_index(matrix, j);
  PairCounts c;
  for (UserIndex u = 0; u < matrix.n_users(); ++u) {
    const bool a = matrix.approves(u, i);
    const bool b = matrix.approves(u, j);
    c.both += (a && b) ? 1 : 0;
    c.either += (a || b) ? 1 : 0;
  }
  return to_distance(c, matrix.n_users(), DistanceKind::jaccard);
}

DistanceIndex::DistanceIndex(const ApprovalMatrix& matrix, double epsilon, DistanceKind kind)
    : m_(matrix.n_opinions()), epsilon_(epsilon), kind_(kind), dist_(m_ * m_, 0.0) {
  if (!(epsilon >= 0.0 && epsilon <= 1.0)) {
    throw std::invalid_argument("epsilon must lie in [0, 1]");
  }
  const PackedColumns packed(matrix);
  const std::size_t n = matrix.n_users();
  for (OpinionIndex i = 0; i < m_; ++i) {
    for (OpinionIndex j = i + 1; j < m_; ++j) {
      const double d = to_distance(count_pair(packed, i, j), n, kind);
      dist_[i * m_ + j] = d;
      dist_[j * m_ + i] = d;
    }
  }
  rebuild_neighbors();
}

void DistanceIndex::rebuild_neighbors() {
  neighbors_.assign(m_, {});
  for (OpinionIndex i = 0; i < m_; ++i) {
    for (OpinionIndex j = 0; j < m_; ++j) {
      if (are_neighbors(i, j)) neighbors_[i].push_back(j);
    }
  }
}

DistanceIndex DistanceIndex::with_epsilon(double epsilon) const {
  if (!(epsilon >= 0.0 && epsilon <= 1.0)) {
    throw std::invalid_argument("epsilon must lie in [0, 1]");
  }
  DistanceIndex copy;
  copy.m_ = m_;
  copy.epsilon_ = epsilon;
  copy.kind_ = kind_;
  copy.dist_ = dist_;
  copy.rebuild_neighbors();
  return copy;
}

DistanceIndex build_distance_index(const ApprovalMatrix& matrix, double epsilon,
                                   DistanceKind kind) {
  return DistanceIndex(matrix, epsilon, kind);
}

std::vector<std::vector<OpinionIndex>> clone_groups(std::span<const OpinionIndex> selection,
                                                    const DistanceIndex& index) {
  // Union-find over selection positions.
  std::vector<std::size_t> parent(selection.size());
  std::iota(parent.begin(), parent.end(), std::size_t{0});
  auto find = [&](std::size_t x) {
    while (parent[x] != x) {
      parent[x] = parent[parent[x]];
      x = parent[x];
    }
    return x;
  };
  for (std::size_t a = 0; a < selection.size(); ++a) {
    for (std::size_t b = a + 1; b < selection.size(); ++b) {
      if (selection[a] == selection[b] || index.are_neighbors(selection[a], selection[b])) {
        const std::size_t ra = find(a);
        const std::size_t rb = find(b);
        if (ra != rb) parent[std::max(ra, rb)] = std::min(ra, rb);
      }
    }
  }
  std::vector<std::vector<OpinionIndex>> groups;
  std::vector<std::size_t> slot(selection.size(), SIZE_MAX);
  for (std::size_t a = 0; a < selection.size(); ++a) {
    const std::size_t root = find(a);
    if (slot[root] == SIZE_MAX) {
      slot[root] = groups.size();
      groups.emplace_back();
    }
    groups[slot[root]].push_back(selection[a]);
  }
  return groups;
}

void write_distance_csv(const DistanceIndex& index, const std::filesystem::path& path) {
  std::ofstream out(path);
  if (!out) throw std::runtime_error("cannot write " + path.string());
  out << std::setprecision(17);
  out << "opinion";
  for (OpinionIndex j = 0; j < index.size(); ++j) out << ',' << j;
  out << '\n';
  for (OpinionIndex i = 0; i < index.size(); ++i) {
    out << i;
    for (double d : index.row(i)) out << ',' << d;
    out << '\n';
  }
}

}  // namespace opsel
