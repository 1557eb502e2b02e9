#pragma once

#include <algorithm>
#include <vector>

#include "magnus/random.hpp"
#include "magnus/sparse.hpp"

namespace test {

using namespace magnus;

inline CsrMatrix random_csr(Index rows, Index cols, double density, std::uint64_t seed, bool integer = true) {
  SplitMix64 rng(seed);
  std::vector<Triplet> t;
  for (Index i = 0; i < rows; ++i) {
    for (Index j = 0; j < cols; ++j) {
      if (rng.uniform01() < density) {
        t.push_back({i, j, integer ? static_cast<Real>(1 + rng.below(5)) : rng.uniform_open_closed()});
      }
    }
  }
  return csr_from_triplets(t, rows, cols);
}

inline std::vector<Triplet> sorted_triplets(const CsrMatrix& m) {
  auto t = to_triplets(m);
  std::sort(t.begin(), t.end(), [](const Triplet& x, const Triplet& y) {
    return x.row != y.row ? x.row < y.row : x.col < y.col;
  });
  return t;
}

inline bool same_triplets(const std::vector<Triplet>& x, const std::vector<Triplet>& y) {
  return x.size() == y.size() && std::equal(x.begin(), x.end(), y.begin(), [](const Triplet& p, const Triplet& q) {
           return p.row == q.row && p.col == q.col && p.val == q.val;
         });
}

}  // namespace test
