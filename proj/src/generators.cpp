#include "magnus/generators.hpp"

#include <algorithm>
#include <cmath>
#include <iterator>
#include <string>
#include <unordered_set>

#include "magnus/errors.hpp"
#include "magnus/random.hpp"
#include "parallel.hpp"

namespace magnus {
namespace {

constexpr std::uint64_t kValueStream = 0x5eed5eed5eed5eedULL;

std::uint64_t rmat_edge(const RmatParams& p, std::uint64_t edge_id) {
  auto rng = SplitMix64::substream(p.seed, edge_id);
  const double ab = p.a + p.b;
  const double abc = ab + p.c;
  std::uint64_t row = 0;
  std::uint64_t col = 0;
  for (unsigned level = 0; level < p.scale; ++level) {
    const double r = rng.uniform01();
    row <<= 1;
    col <<= 1;
    if (r < p.a) {
    } else if (r < ab) {
      col |= 1;
    } else if (r < abc) {
      row |= 1;
    } else {
      row |= 1;
      col |= 1;
    }
  }
  return (row << p.scale) | col;
}

// Floyd's algorithm: k distinct values from [0, n), returned sorted.
void sample_distinct(SplitMix64& rng, Index n, Index k, std::vector<Index>& out,
                     std::unordered_set<Index>& seen) {
  out.clear();
  seen.clear();
  for (Index j = n - k; j < n; ++j) {
    const Index t = rng.below(j + 1);
    const Index pick = seen.insert(t).second ? t : j;
    if (pick == j) seen.insert(j);
    out.push_back(pick);
  }
  std::sort(out.begin(), out.end());
}

void check_er(const ErParams& p) {
  if (p.avg_nnz_per_row > p.n_cols) {
    throw InputError("avg_nnz_per_row (" + std::to_string(p.avg_nnz_per_row) + ") exceeds n_cols (" +
                     std::to_string(p.n_cols) + ")");
  }
}

void fill_er_rows(const ErParams& p, std::span<const Index> rows, CsrMatrix& m, int threads) {
  const auto n = static_cast<std::int64_t>(rows.size());
#pragma omp parallel num_threads(detail::worker_count(threads)) if (n > 64)
  {
    std::vector<Index> cols;
    std::unordered_set<Index> seen;
    seen.reserve(2 * p.avg_nnz_per_row);
#pragma omp for schedule(dynamic, 32)
    for (std::int64_t r = 0; r < n; ++r) {
      const Index i = rows[r];
      auto rng = SplitMix64::substream(p.seed, i);
      sample_distinct(rng, p.n_cols, p.avg_nnz_per_row, cols, seen);
      const Offset base = m.row_ptr[i];
      for (std::size_t k = 0; k < cols.size(); ++k) {
        m.col[base + k] = cols[k];
        m.val[base + k] = p.random_values ? rng.uniform_open_closed() : 1.0;
      }
    }
  }
}

}  // namespace

CsrMatrix gen_rmat(const RmatParams& p, int threads) {
  if (p.scale < 1 || p.scale > 32) throw InputError("rmat scale must be in [1, 32]");
  if (p.a < 0 || p.b < 0 || p.c < 0 || p.a + p.b + p.c > 1.0 + 1e-12) {
    throw InputError("rmat probabilities must be non-negative with a + b + c <= 1");
  }
  const Index n = Index{1} << p.scale;
  const unsigned __int128 cells = static_cast<unsigned __int128>(n) * n;
  const unsigned __int128 target128 = static_cast<unsigned __int128>(p.edge_factor) * n;
  if (target128 > cells) {
    throw InputError("rmat target nnz exceeds " + std::to_string(n) + "^2 cells");
  }
  const auto target = static_cast<std::uint64_t>(target128);

  std::vector<std::uint64_t> edges;  // sorted, unique keys row << scale | col
  std::vector<std::uint64_t> fresh;
  std::vector<std::uint64_t> merged;
  std::uint64_t next_id = 0;
  int stalled_rounds = 0;
  while (edges.size() < target) {
    const std::uint64_t deficit = target - edges.size();
    fresh.resize(deficit);
    const auto count = static_cast<std::int64_t>(deficit);
#pragma omp parallel for num_threads(detail::worker_count(threads)) schedule(static) if (count > 4096)
    for (std::int64_t e = 0; e < count; ++e) fresh[e] = rmat_edge(p, next_id + static_cast<std::uint64_t>(e));
    next_id += deficit;

    std::sort(fresh.begin(), fresh.end());
    fresh.erase(std::unique(fresh.begin(), fresh.end()), fresh.end());
    merged.clear();
    merged.reserve(edges.size() + fresh.size());
    std::set_union(edges.begin(), edges.end(), fresh.begin(), fresh.end(), std::back_inserter(merged));
    // A new sample may collide with an edge already kept; set_union keeps one
    // copy, and the shortfall is drawn again next round.
    if (merged.size() == edges.size()) {
      if (++stalled_rounds > 100000) throw InputError("rmat probabilities cannot reach the requested nnz");
    } else {
      stalled_rounds = 0;
    }
    edges.swap(merged);
  }

  CsrMatrix m(n, n);
  m.col.resize(target);
  m.val.resize(target);
  const std::uint64_t col_mask = n - 1;
  for (std::size_t k = 0; k < edges.size(); ++k) {
    const std::uint64_t row = edges[k] >> p.scale;
    ++m.row_ptr[row + 1];
    m.col[k] = edges[k] & col_mask;
    if (p.random_values) {
      m.val[k] = SplitMix64::substream(p.seed ^ kValueStream, edges[k]).uniform_open_closed();
    } else {
      m.val[k] = 1.0;
    }
  }
  for (Index i = 0; i < n; ++i) m.row_ptr[i + 1] += m.row_ptr[i];
  return m;
}

CsrMatrix gen_uniform_random(const ErParams& p, int threads) {
  check_er(p);
  std::vector<Index> rows(p.n_rows);
  for (Index i = 0; i < p.n_rows; ++i) rows[i] = i;
  return gen_uniform_random_rows(p, rows, threads);
}

CsrMatrix gen_uniform_random_rows(const ErParams& p, std::span<const Index> rows, int threads) {
  check_er(p);
  CsrMatrix m(p.n_rows, p.n_cols);
  for (std::size_t r = 0; r < rows.size(); ++r) {
    if (rows[r] >= p.n_rows) throw InputError("row " + std::to_string(rows[r]) + " out of range");
    if (r > 0 && rows[r] <= rows[r - 1]) throw InputError("rows must be sorted and unique");
    m.row_ptr[rows[r] + 1] = p.avg_nnz_per_row;
  }
  for (Index i = 0; i < p.n_rows; ++i) m.row_ptr[i + 1] += m.row_ptr[i];
  m.col.resize(m.nnz());
  m.val.resize(m.nnz());
  fill_er_rows(p, rows, m, threads);
  return m;
}

CsrMatrix gen_banded(const BandedParams& p) {
  CsrMatrix m(p.n, p.n);
  for (Index i = 0; i < p.n; ++i) {
    const Index lo = i >= p.half_width ? i - p.half_width : 0;
    const Index hi = std::min(p.n - 1, i + p.half_width);
    auto rng = SplitMix64::substream(p.seed, i);
    for (Index j = lo; j <= hi; ++j) {
      m.col.push_back(j);
      m.val.push_back(p.random_values ? rng.uniform_open_closed() : 1.0);
    }
    m.row_ptr[i + 1] = m.col.size();
  }
  return m;
}

}  // namespace magnus

namespace magnus {

MatrixPair gen_er_product(const ErProductParams& params, int threads) {
  const Index inner = params.inner == 0 ? params.cols_c : params.inner;
  MatrixPair out;
  out.a = gen_uniform_random({params.rows_c, inner, params.a_nnz_per_row, params.seed, params.random_values}, threads);
  std::vector<Index> rows(out.a.col.begin(), out.a.col.end());
  std::sort(rows.begin(), rows.end());
  rows.erase(std::unique(rows.begin(), rows.end()), rows.end());
  const ErParams pb{inner, params.cols_c, params.b_nnz_per_row, SplitMix64::mix(params.seed + 1), params.random_values};
  out.b = gen_uniform_random_rows(pb, rows, threads);
  return out;
}

}  // namespace magnus
