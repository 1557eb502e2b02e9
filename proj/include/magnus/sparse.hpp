#pragma once

#include <cstddef>
#include <span>
#include <string>
#include <vector>

#include "magnus/types.hpp"

namespace magnus {

struct Triplet {
  Index row;
  Index col;
  Real val;
};

/// Compressed sparse row matrix.
///
/// row_ptr has n_rows + 1 entries, row_ptr[0] == 0 and row_ptr.back() == nnz.
/// Columns of row i live in col[row_ptr[i], row_ptr[i+1]). A matrix is
/// canonical when every row's columns are strictly increasing; generators,
/// readers and all SpGEMM drivers return canonical matrices.
struct CsrMatrix {
  Index n_rows = 0;
  Index n_cols = 0;
  std::vector<Offset> row_ptr{0};
  std::vector<Index> col;
  std::vector<Real> val;

  CsrMatrix() = default;
  CsrMatrix(Index rows, Index cols) : n_rows(rows), n_cols(cols), row_ptr(rows + 1, 0) {}

  Offset nnz() const { return row_ptr.back(); }
  Offset row_nnz(Index i) const { return row_ptr[i + 1] - row_ptr[i]; }

  std::span<const Index> row_cols(Index i) const {
    return {col.data() + row_ptr[i], static_cast<std::size_t>(row_nnz(i))};
  }
  std::span<const Real> row_vals(Index i) const {
    return {val.data() + row_ptr[i], static_cast<std::size_t>(row_nnz(i))};
  }

  /// Width in bytes a column index needs for this matrix: 4 when every
  /// column id fits in 32 bits, 8 otherwise.
  int col_index_bytes() const { return n_cols <= (Index{1} << 32) ? 4 : 8; }

  bool operator==(const CsrMatrix&) const = default;
};

/// CSC view of a subset of CSR rows. Local row k refers to source_rows[k].
struct CscSubMatrix {
  Index n_cols = 0;
  std::vector<Index> source_rows;
  std::vector<Offset> col_ptr{0};
  std::vector<Index> row;
  std::vector<Real> val;

  Offset nnz() const { return col_ptr.back(); }
};

/// Builds a canonical CSR matrix; duplicate (row, col) entries are summed in
/// input order. Throws InputError on out-of-range indices.
CsrMatrix csr_from_triplets(std::span<const Triplet> triplets, Index n_rows, Index n_cols);

std::vector<Triplet> to_triplets(const CsrMatrix& m);

CsrMatrix identity(Index n);

/// Nonzeros of the selected rows in column-major order. Entries of each
/// column appear in ascending local row order. rows must be sorted, unique
/// and in range.
CscSubMatrix csr_rows_to_csc(const CsrMatrix& source, std::span<const Index> rows);

struct ValidationReport {
  bool ok = true;
  std::string message;
  std::size_t index = 0;  // position of the first violation

  explicit operator bool() const { return ok; }
};

/// Checks the CSR invariants and reports the first violation found. With
/// require_sorted the rows must also be strictly increasing.
ValidationReport validate_csr(const CsrMatrix& m, bool require_sorted = true);

bool has_sorted_rows(const CsrMatrix& m);

/// Sorts every row by column in place. Rows must not contain duplicates.
void sort_rows(CsrMatrix& m, int threads = 0);

}  // namespace magnus
