#pragma once

#include <cstdint>
#include <span>

#include "magnus/sparse.hpp"

namespace magnus {

/// Recursive-matrix (R-mat) parameters. The quadrant probabilities default
/// to the Graph500 values; d = 1 - a - b - c.
struct RmatParams {
  unsigned scale = 10;
  Index edge_factor = 16;
  double a = 0.57;
  double b = 0.19;
  double c = 0.19;
  std::uint64_t seed = 1;
  bool random_values = false;  // values in (0, 1] instead of 1.0
};

/// Uniform random (Erdos-Renyi style) matrix with a fixed count per row.
struct ErParams {
  Index n_rows = 0;
  Index n_cols = 0;
  Index avg_nnz_per_row = 0;
  std::uint64_t seed = 1;
  bool random_values = false;
};

/// Square banded matrix: row i holds columns [i - half_width, i + half_width].
struct BandedParams {
  Index n = 0;
  Index half_width = 0;
  std::uint64_t seed = 1;
  bool random_values = false;
};

/// Square 2^scale matrix with exactly edge_factor * 2^scale distinct
/// nonzeros. Duplicate edges are discarded and resampled.
CsrMatrix gen_rmat(const RmatParams& params, int threads = 0);

CsrMatrix gen_uniform_random(const ErParams& params, int threads = 0);

/// Same matrix as gen_uniform_random, but only the listed rows are
/// populated; every other row is empty. Row contents match the full
/// generator exactly. rows must be sorted and unique.
CsrMatrix gen_uniform_random_rows(const ErParams& params, std::span<const Index> rows, int threads = 0);

CsrMatrix gen_banded(const BandedParams& params);

/// Nonsquare uniform random product: A is rows_c x inner with a_nnz_per_row
/// entries per row, B is inner x cols_c with b_nnz_per_row entries per row,
/// and only the rows of B referenced by A are generated.
struct ErProductParams {
  Index rows_c = 4096;
  Index cols_c = Index{1} << 22;
  Index inner = 0;  // 0: same as cols_c
  Index a_nnz_per_row = 4;
  Index b_nnz_per_row = 2048;
  std::uint64_t seed = 1;
  bool random_values = false;
};

struct MatrixPair {
  CsrMatrix a;
  CsrMatrix b;
};

MatrixPair gen_er_product(const ErProductParams& params, int threads = 0);

}  // namespace magnus
