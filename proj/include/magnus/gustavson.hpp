#pragma once

#include <cstdint>
#include <map>
#include <string>
#include <vector>

#include "magnus/sparse.hpp"

namespace magnus {

/// Output of a full SpGEMM run. phase_seconds holds "setup", "symbolic",
/// "numeric" and "canonicalize" where applicable; counters always include
/// "inter_prod_size" and "nnz_c".
struct SpgemmResult {
  CsrMatrix c;
  std::map<std::string, double> phase_seconds;
  std::map<std::string, std::uint64_t> counters;
  std::vector<std::string> warnings;

  /// setup + symbolic + numeric. Row canonicalization is reported on its own.
  double total_seconds() const;
};

/// Per-row size and column span of the intermediate product of A * B.
struct RowStats {
  std::vector<Offset> inter_size;
  std::vector<Index> min_col;  // valid where inter_size > 0
  std::vector<Index> max_col;

  Offset total() const;
  /// max_col - min_col + 1, or 0 for an empty row.
  Index range(Index i) const { return inter_size[i] == 0 ? 0 : max_col[i] - min_col[i] + 1; }
};

/// Reads only A and the first/last column of each referenced row of B.
RowStats row_intermediate_stats(const CsrMatrix& a, const CsrMatrix& b, int threads = 0);

/// Oracle: serial per-row dense vector with a column-ascending drain.
/// Limited to B.n_cols <= 2^22.
CsrMatrix spgemm_reference(const CsrMatrix& a, const CsrMatrix& b);

/// Exact row pointer of A * B from a bitmap-only pass.
std::vector<Offset> gustavson_dense_symbolic(const CsrMatrix& a, const CsrMatrix& b, int threads = 0);
/// Exact row pointer from sorting each row's column stream.
std::vector<Offset> gustavson_esc_symbolic(const CsrMatrix& a, const CsrMatrix& b, int threads = 0);

/// Dense-accumulator numeric phase. row_ptr must come from a symbolic pass;
/// a row whose size disagrees raises ContractViolation.
SpgemmResult gustavson_dense_numeric(const CsrMatrix& a, const CsrMatrix& b, std::vector<Offset> row_ptr,
                                     int threads = 0);

/// Expand-sort-compress numeric phase.
SpgemmResult gustavson_esc_numeric(const CsrMatrix& a, const CsrMatrix& b, std::vector<Offset> row_ptr,
                                   int threads = 0);

/// Symbolic + numeric, with phase timings.
SpgemmResult spgemm_gustavson_dense(const CsrMatrix& a, const CsrMatrix& b, int threads = 0);
SpgemmResult spgemm_esc(const CsrMatrix& a, const CsrMatrix& b, int threads = 0);

namespace detail {
void check_dims(const CsrMatrix& a, const CsrMatrix& b);
}

}  // namespace magnus
