#include "magnus/sparse.hpp"

#include <algorithm>
#include <numeric>
#include <utility>

#include "magnus/errors.hpp"
#include "parallel.hpp"

namespace magnus {

CsrMatrix csr_from_triplets(std::span<const Triplet> triplets, Index n_rows, Index n_cols) {
  CsrMatrix m(n_rows, n_cols);
  for (std::size_t k = 0; k < triplets.size(); ++k) {
    const auto& t = triplets[k];
    if (t.row >= n_rows || t.col >= n_cols) {
      throw InputError("triplet " + std::to_string(k) + " (" + std::to_string(t.row) + ", " +
                       std::to_string(t.col) + ") outside " + std::to_string(n_rows) + "x" +
                       std::to_string(n_cols));
    }
    ++m.row_ptr[t.row + 1];
  }
  std::partial_sum(m.row_ptr.begin(), m.row_ptr.end(), m.row_ptr.begin());

  // Counting sort by row keeps input order inside a row, so the stable sort
  // below sums duplicates in input order.
  std::vector<std::size_t> order(triplets.size());
  std::vector<Offset> cursor(m.row_ptr.begin(), m.row_ptr.end() - 1);
  for (std::size_t k = 0; k < triplets.size(); ++k) order[cursor[triplets[k].row]++] = k;

  m.col.reserve(triplets.size());
  m.val.reserve(triplets.size());
  std::vector<Offset> merged_ptr(n_rows + 1, 0);
  for (Index i = 0; i < n_rows; ++i) {
    auto first = order.begin() + static_cast<std::ptrdiff_t>(m.row_ptr[i]);
    auto last = order.begin() + static_cast<std::ptrdiff_t>(m.row_ptr[i + 1]);
    std::stable_sort(first, last, [&](std::size_t a, std::size_t b) {
      return triplets[a].col < triplets[b].col;
    });
    for (auto it = first; it != last; ++it) {
      const auto& t = triplets[*it];
      if (m.col.size() > merged_ptr[i] && m.col.back() == t.col) {
        m.val.back() += t.val;
      } else {
        m.col.push_back(t.col);
        m.val.push_back(t.val);
      }
    }
    merged_ptr[i + 1] = m.col.size();
  }
  m.row_ptr = std::move(merged_ptr);
  return m;
}

std::vector<Triplet> to_triplets(const CsrMatrix& m) {
  std::vector<Triplet> out;
  out.reserve(m.nnz());
  for (Index i = 0; i < m.n_rows; ++i) {
    for (Offset k = m.row_ptr[i]; k < m.row_ptr[i + 1]; ++k) out.push_back({i, m.col[k], m.val[k]});
  }
  return out;
}

CsrMatrix identity(Index n) {
  CsrMatrix m(n, n);
  m.col.resize(n);
  m.val.assign(n, 1.0);
  std::iota(m.row_ptr.begin(), m.row_ptr.end(), Offset{0});
  std::iota(m.col.begin(), m.col.end(), Index{0});
  return m;
}

CscSubMatrix csr_rows_to_csc(const CsrMatrix& source, std::span<const Index> rows) {
  CscSubMatrix csc;
  csc.n_cols = source.n_cols;
  csc.source_rows.assign(rows.begin(), rows.end());
  csc.col_ptr.assign(source.n_cols + 1, 0);

  // Histogram of nonzeros per column, then exclusive offsets.
  for (Index r : rows) {
    for (Index c : source.row_cols(r)) ++csc.col_ptr[c + 1];
  }
  std::partial_sum(csc.col_ptr.begin(), csc.col_ptr.end(), csc.col_ptr.begin());

  csc.row.resize(csc.col_ptr.back());
  csc.val.resize(csc.col_ptr.back());
  std::vector<Offset> cursor(csc.col_ptr.begin(), csc.col_ptr.end() - 1);
  for (std::size_t local = 0; local < rows.size(); ++local) {
    const Index r = rows[local];
    for (Offset k = source.row_ptr[r]; k < source.row_ptr[r + 1]; ++k) {
      const Offset pos = cursor[source.col[k]]++;
      csc.row[pos] = local;
      csc.val[pos] = source.val[k];
    }
  }
  return csc;
}

ValidationReport validate_csr(const CsrMatrix& m, bool require_sorted) {
  auto fail = [](std::string msg, std::size_t idx) { return ValidationReport{false, std::move(msg), idx}; };
  if (m.row_ptr.size() != m.n_rows + 1) {
    return fail("row_ptr has " + std::to_string(m.row_ptr.size()) + " entries, expected " +
                    std::to_string(m.n_rows + 1),
                m.row_ptr.size());
  }
  if (m.row_ptr[0] != 0) return fail("row_ptr[0] is not zero", 0);
  for (std::size_t i = 0; i < m.n_rows; ++i) {
    if (m.row_ptr[i + 1] < m.row_ptr[i]) return fail("row_ptr decreases at index " + std::to_string(i + 1), i + 1);
  }
  if (m.col.size() != m.nnz() || m.val.size() != m.nnz()) {
    return fail("col/val length does not match row_ptr[n_rows]", m.n_rows);
  }
  for (std::size_t k = 0; k < m.col.size(); ++k) {
    if (m.col[k] >= m.n_cols) return fail("column index out of range at position " + std::to_string(k), k);
  }
  if (require_sorted) {
    for (Index i = 0; i < m.n_rows; ++i) {
      for (Offset k = m.row_ptr[i] + 1; k < m.row_ptr[i + 1]; ++k) {
        if (m.col[k] <= m.col[k - 1]) {
          return fail("row " + std::to_string(i) + " not strictly increasing at position " + std::to_string(k), k);
        }
      }
    }
  }
  return {};
}

bool has_sorted_rows(const CsrMatrix& m) {
  for (Index i = 0; i < m.n_rows; ++i) {
    auto cols = m.row_cols(i);
    if (std::adjacent_find(cols.begin(), cols.end(), std::greater_equal<>{}) != cols.end()) return false;
  }
  return true;
}

void sort_rows(CsrMatrix& m, int threads) {
  const auto n = static_cast<std::int64_t>(m.n_rows);
#pragma omp parallel num_threads(detail::worker_count(threads)) if (n > 1024)
  {
    std::vector<std::pair<Index, Real>> scratch;
#pragma omp for schedule(dynamic, 256)
    for (std::int64_t i = 0; i < n; ++i) {
      const Offset b = m.row_ptr[i];
      const Offset e = m.row_ptr[i + 1];
      if (std::is_sorted(m.col.begin() + b, m.col.begin() + e)) continue;
      scratch.clear();
      for (Offset k = b; k < e; ++k) scratch.emplace_back(m.col[k], m.val[k]);
      std::sort(scratch.begin(), scratch.end(), [](const auto& x, const auto& y) { return x.first < y.first; });
      for (Offset k = b; k < e; ++k) {
        m.col[k] = scratch[k - b].first;
        m.val[k] = scratch[k - b].second;
      }
    }
  }
}

}  // namespace magnus
