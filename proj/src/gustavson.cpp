#include "magnus/gustavson.hpp"

#include <algorithm>
#include <limits>
#include <numeric>
#include <string>

#include "magnus/accumulators.hpp"
#include "magnus/errors.hpp"
#include "parallel.hpp"
#include "timer.hpp"

namespace magnus {

double SpgemmResult::total_seconds() const {
  double t = 0;
  for (const char* phase : {"setup", "symbolic", "numeric"}) {
    if (auto it = phase_seconds.find(phase); it != phase_seconds.end()) t += it->second;
  }
  return t;
}

Offset RowStats::total() const { return std::accumulate(inter_size.begin(), inter_size.end(), Offset{0}); }

namespace detail {

void check_dims(const CsrMatrix& a, const CsrMatrix& b) {
  if (a.n_cols != b.n_rows) {
    throw InputError("dimension mismatch: A is " + std::to_string(a.n_rows) + "x" + std::to_string(a.n_cols) +
                     ", B is " + std::to_string(b.n_rows) + "x" + std::to_string(b.n_cols));
  }
}

}  // namespace detail

namespace {

void check_row_ptr(const std::vector<Offset>& row_ptr, Index n_rows) {
  if (row_ptr.size() != n_rows + 1 || row_ptr.front() != 0) {
    throw ContractViolation("row_ptr does not match A: expected " + std::to_string(n_rows + 1) + " entries");
  }
}

void row_size_mismatch(Index row, Offset expected, Offset got) {
  throw ContractViolation("row " + std::to_string(row) + " has " + std::to_string(got) +
                          " nonzeros but row_ptr reserves " + std::to_string(expected));
}

CsrMatrix allocate_output(const CsrMatrix& a, const CsrMatrix& b, std::vector<Offset> row_ptr) {
  CsrMatrix c;
  c.n_rows = a.n_rows;
  c.n_cols = b.n_cols;
  c.row_ptr = std::move(row_ptr);
  c.col.resize(c.nnz());
  c.val.resize(c.nnz());
  return c;
}

void finish(SpgemmResult& r, Offset inter, int threads) {
  detail::Stopwatch sw;
  sort_rows(r.c, threads);
  r.phase_seconds["canonicalize"] = sw.seconds();
  r.counters["inter_prod_size"] = inter;
  r.counters["nnz_c"] = r.c.nnz();
}

}  // namespace

RowStats row_intermediate_stats(const CsrMatrix& a, const CsrMatrix& b, int threads) {
  detail::check_dims(a, b);
  RowStats s;
  s.inter_size.assign(a.n_rows, 0);
  s.min_col.assign(a.n_rows, 0);
  s.max_col.assign(a.n_rows, 0);

  // Per-row bounds of B: first/last entry for sorted rows, a scan otherwise.
  const bool sorted = has_sorted_rows(b);
  auto b_min = [&](Index j) {
    auto cols = b.row_cols(j);
    return sorted ? cols.front() : *std::min_element(cols.begin(), cols.end());
  };
  auto b_max = [&](Index j) {
    auto cols = b.row_cols(j);
    return sorted ? cols.back() : *std::max_element(cols.begin(), cols.end());
  };

  const auto n = static_cast<std::int64_t>(a.n_rows);
#pragma omp parallel for num_threads(detail::worker_count(threads)) schedule(dynamic, 512)
  for (std::int64_t i = 0; i < n; ++i) {
    Offset size = 0;
    Index lo = std::numeric_limits<Index>::max();
    Index hi = 0;
    for (Index j : a.row_cols(static_cast<Index>(i))) {
      const Offset len = b.row_nnz(j);
      if (len == 0) continue;
      size += len;
      lo = std::min(lo, b_min(j));
      hi = std::max(hi, b_max(j));
    }
    s.inter_size[i] = size;
    if (size > 0) {
      s.min_col[i] = lo;
      s.max_col[i] = hi;
    }
  }
  return s;
}

CsrMatrix spgemm_reference(const CsrMatrix& a, const CsrMatrix& b) {
  detail::check_dims(a, b);
  if (b.n_cols > (Index{1} << 22)) throw InputError("reference SpGEMM is limited to 2^22 columns");
  CsrMatrix c(a.n_rows, b.n_cols);
  std::vector<Real> dense(b.n_cols, 0.0);
  std::vector<char> used(b.n_cols, 0);
  std::vector<Index> touched;
  for (Index i = 0; i < a.n_rows; ++i) {
    touched.clear();
    for (Offset ka = a.row_ptr[i]; ka < a.row_ptr[i + 1]; ++ka) {
      const Index j = a.col[ka];
      for (Offset kb = b.row_ptr[j]; kb < b.row_ptr[j + 1]; ++kb) {
        const Index col = b.col[kb];
        if (!used[col]) {
          used[col] = 1;
          touched.push_back(col);
        }
        dense[col] += a.val[ka] * b.val[kb];
      }
    }
    std::sort(touched.begin(), touched.end());
    for (Index col : touched) {
      c.col.push_back(col);
      c.val.push_back(dense[col]);
      dense[col] = 0.0;
      used[col] = 0;
    }
    c.row_ptr[i + 1] = c.col.size();
  }
  return c;
}

std::vector<Offset> gustavson_dense_symbolic(const CsrMatrix& a, const CsrMatrix& b, int threads) {
  detail::check_dims(a, b);
  std::vector<Offset> row_ptr(a.n_rows + 1, 0);
  const auto n = static_cast<std::int64_t>(a.n_rows);
#pragma omp parallel num_threads(detail::worker_count(threads))
  {
    DenseAccumulator acc(b.n_cols);
#pragma omp for schedule(dynamic, 64)
    for (std::int64_t i = 0; i < n; ++i) {
      for (Index j : a.row_cols(static_cast<Index>(i))) {
        for (Index col : b.row_cols(j)) acc.mark(col);
      }
      row_ptr[i + 1] = acc.drain_symbolic();
    }
  }
  std::partial_sum(row_ptr.begin(), row_ptr.end(), row_ptr.begin());
  return row_ptr;
}

std::vector<Offset> gustavson_esc_symbolic(const CsrMatrix& a, const CsrMatrix& b, int threads) {
  detail::check_dims(a, b);
  std::vector<Offset> row_ptr(a.n_rows + 1, 0);
  const auto n = static_cast<std::int64_t>(a.n_rows);
#pragma omp parallel num_threads(detail::worker_count(threads))
  {
    SortAccumulator acc;
    std::vector<Index> cols;
#pragma omp for schedule(dynamic, 64)
    for (std::int64_t i = 0; i < n; ++i) {
      cols.clear();
      for (Index j : a.row_cols(static_cast<Index>(i))) {
        auto bc = b.row_cols(j);
        cols.insert(cols.end(), bc.begin(), bc.end());
      }
      row_ptr[i + 1] = acc.count_distinct(cols);
    }
  }
  std::partial_sum(row_ptr.begin(), row_ptr.end(), row_ptr.begin());
  return row_ptr;
}

SpgemmResult gustavson_dense_numeric(const CsrMatrix& a, const CsrMatrix& b, std::vector<Offset> row_ptr,
                                     int threads) {
  detail::check_dims(a, b);
  check_row_ptr(row_ptr, a.n_rows);
  detail::Stopwatch sw;
  SpgemmResult r;
  r.c = allocate_output(a, b, std::move(row_ptr));
  CsrMatrix& c = r.c;
  Offset inter = 0;
  detail::ErrorSlot errors;
  const auto n = static_cast<std::int64_t>(a.n_rows);
#pragma omp parallel num_threads(detail::worker_count(threads)) reduction(+ : inter)
  {
    DenseAccumulator acc(b.n_cols);
    acc.enable_values();
#pragma omp for schedule(dynamic, 64)
    for (std::int64_t ii = 0; ii < n; ++ii) {
      const auto i = static_cast<Index>(ii);
      for (Offset ka = a.row_ptr[i]; ka < a.row_ptr[i + 1]; ++ka) {
        const Real av = a.val[ka];
        const Index j = a.col[ka];
        inter += b.row_nnz(j);
        for (Offset kb = b.row_ptr[j]; kb < b.row_ptr[j + 1]; ++kb) acc.add(b.col[kb], av * b.val[kb]);
      }
      const Offset expected = c.row_nnz(i);
      if (acc.count() != expected) {
        const Offset got = acc.drain_symbolic();
        errors.run([&] { row_size_mismatch(i, expected, got); });
        continue;
      }
      acc.drain(0, c.col.data() + c.row_ptr[i], c.val.data() + c.row_ptr[i]);
    }
  }
  errors.rethrow();
  r.phase_seconds["numeric"] = sw.seconds();
  finish(r, inter, threads);
  return r;
}

SpgemmResult gustavson_esc_numeric(const CsrMatrix& a, const CsrMatrix& b, std::vector<Offset> row_ptr,
                                   int threads) {
  detail::check_dims(a, b);
  check_row_ptr(row_ptr, a.n_rows);
  detail::Stopwatch sw;
  SpgemmResult r;
  r.c = allocate_output(a, b, std::move(row_ptr));
  CsrMatrix& c = r.c;
  Offset inter = 0;
  detail::ErrorSlot errors;
  const auto n = static_cast<std::int64_t>(a.n_rows);
#pragma omp parallel num_threads(detail::worker_count(threads)) reduction(+ : inter)
  {
    SortAccumulator acc;
    std::vector<Index> cols;
    std::vector<Real> vals;
    std::vector<Index> out_cols;
    std::vector<Real> out_vals;
#pragma omp for schedule(dynamic, 64)
    for (std::int64_t ii = 0; ii < n; ++ii) {
      const auto i = static_cast<Index>(ii);
      cols.clear();
      vals.clear();
      for (Offset ka = a.row_ptr[i]; ka < a.row_ptr[i + 1]; ++ka) {
        const Real av = a.val[ka];
        const Index j = a.col[ka];
        for (Offset kb = b.row_ptr[j]; kb < b.row_ptr[j + 1]; ++kb) {
          cols.push_back(b.col[kb]);
          vals.push_back(av * b.val[kb]);
        }
      }
      inter += cols.size();
      if (out_cols.size() < cols.size()) {
        out_cols.resize(cols.size());
        out_vals.resize(cols.size());
      }
      const std::size_t got = acc.accumulate(cols, vals, out_cols.data(), out_vals.data());
      const Offset expected = c.row_nnz(i);
      if (got != expected) {
        errors.run([&] { row_size_mismatch(i, expected, got); });
        continue;
      }
      std::copy_n(out_cols.begin(), got, c.col.begin() + static_cast<std::ptrdiff_t>(c.row_ptr[i]));
      std::copy_n(out_vals.begin(), got, c.val.begin() + static_cast<std::ptrdiff_t>(c.row_ptr[i]));
    }
  }
  errors.rethrow();
  r.phase_seconds["numeric"] = sw.seconds();
  finish(r, inter, threads);
  return r;
}

SpgemmResult spgemm_gustavson_dense(const CsrMatrix& a, const CsrMatrix& b, int threads) {
  detail::Stopwatch sw;
  auto row_ptr = gustavson_dense_symbolic(a, b, threads);
  const double symbolic = sw.seconds();
  auto r = gustavson_dense_numeric(a, b, std::move(row_ptr), threads);
  r.phase_seconds["symbolic"] = symbolic;
  return r;
}

SpgemmResult spgemm_esc(const CsrMatrix& a, const CsrMatrix& b, int threads) {
  detail::Stopwatch sw;
  auto row_ptr = gustavson_esc_symbolic(a, b, threads);
  const double symbolic = sw.seconds();
  auto r = gustavson_esc_numeric(a, b, std::move(row_ptr), threads);
  r.phase_seconds["symbolic"] = symbolic;
  return r;
}

}  // namespace magnus
