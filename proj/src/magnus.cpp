#include "magnus/magnus.hpp"

#include <algorithm>
#include <numeric>
#include <optional>
#include <span>
#include <string>

#include "magnus/coarse_level.hpp"
#include "magnus/errors.hpp"
#include "magnus/fine_level.hpp"
#include "parallel.hpp"
#include "timer.hpp"

namespace magnus {
namespace {

constexpr Index kCoarseChunkWarning = Index{1} << 13;

// Per-worker scratch for every category.
struct Worker {
  Worker(const MagnusSetup& s, const ChunkPlan& plan, Index b_rows) {
    if (!s.categories.fine_rows.empty()) {
      fine.configure(plan.n_chunks_fine, plan.chunk_len_fine, s.thresholds, plan.phase);
    }
    if (!s.coarse_batches.empty()) coarse.configure(plan, s.thresholds, b_rows);
    if (plan.phase == Phase::Numeric) dense.enable_values();
  }

  SortAccumulator sort;
  DenseAccumulator dense;
  FineLevelWorkspace fine;
  CoarseLevelWorkspace coarse;
  std::vector<Index> cols;
  std::vector<Real> vals;
  std::vector<Index> out_cols;
  std::vector<Real> out_vals;
};

// Materializes a row's intermediate product (sort category).
void expand_row(const CsrMatrix& a, const CsrMatrix& b, Index i, Worker& w, bool numeric) {
  w.cols.clear();
  w.vals.clear();
  for (Offset ka = a.row_ptr[i]; ka < a.row_ptr[i + 1]; ++ka) {
    const Index j = a.col[ka];
    const Real av = a.val[ka];
    for (Offset kb = b.row_ptr[j]; kb < b.row_ptr[j + 1]; ++kb) {
      w.cols.push_back(b.col[kb]);
      if (numeric) w.vals.push_back(av * b.val[kb]);
    }
  }
}

// Writes emitted groups into C's row and checks the reserved size.
class RowWriter {
 public:
  RowWriter(CsrMatrix& c, Index row) : c_(c), row_(row), pos_(c.row_ptr[row]), end_(c.row_ptr[row + 1]) {}

  void operator()(std::span<const Index> cols, std::span<const Real> vals) {
    if (pos_ + cols.size() > end_) overflow();
    std::copy(cols.begin(), cols.end(), c_.col.begin() + static_cast<std::ptrdiff_t>(pos_));
    std::copy(vals.begin(), vals.end(), c_.val.begin() + static_cast<std::ptrdiff_t>(pos_));
    pos_ += cols.size();
  }
  void finish() const {
    if (pos_ != end_) overflow();
  }

 private:
  [[noreturn]] void overflow() const {
    throw ContractViolation("row " + std::to_string(row_) + " does not match its reserved size " +
                            std::to_string(end_ - c_.row_ptr[row_]));
  }
  CsrMatrix& c_;
  Index row_;
  Offset pos_;
  Offset end_;
};

Index symbolic_dense_row(const CsrMatrix& a, const CsrMatrix& b, Index i, Index lo, Index range, Worker& w) {
  w.dense.reserve(range);
  for (Index j : a.row_cols(i)) {
    for (Index c : b.row_cols(j)) w.dense.mark(c - lo);
  }
  return w.dense.drain_symbolic();
}

}  // namespace

MagnusSetup magnus_setup(const CsrMatrix& a, const CsrMatrix& b, const MagnusOptions& options) {
  detail::check_dims(a, b);
  MagnusSetup s;
  if (options.system) {
    s.system = *options.system;
  } else {
    auto detected = detect_system();
    s.system = detected.params;
    s.warnings = std::move(detected.warnings);
  }
  s.system.validate();
  if (options.thresholds.sort_sweet_spot > options.thresholds.sort_dense_crossover) {
    throw InputError("sort sweet spot must not exceed the sort/dense crossover");
  }
  s.thresholds = options.thresholds;
  s.threads = options.threads;
  s.stats = row_intermediate_stats(a, b, options.threads);
  s.plans = compute_phase_plans(s.system, b.n_cols, !options.force_fine_only);
  s.categories = categorize_rows(s.stats, s.plans.numeric, s.system, s.thresholds);
  s.coarse_batches = build_coarse_batches(s.categories.coarse_rows, s.stats, s.plans.numeric, s.system);
  if (s.plans.numeric.use_coarse && s.plans.numeric.n_chunks_coarse > kCoarseChunkWarning) {
    s.warnings.push_back(std::to_string(s.plans.numeric.n_chunks_coarse) +
                         " coarse chunks exceed the 8192-chunk reorder sweet spot");
  }
  return s;
}

std::vector<Offset> magnus_symbolic(const CsrMatrix& a, const CsrMatrix& b, const MagnusSetup& s) {
  detail::check_dims(a, b);
  if (s.stats.inter_size.size() != a.n_rows) throw ContractViolation("setup was computed for a different A");
  const ChunkPlan& plan = s.plans.symbolic;
  const auto& cats = s.categories;
  std::vector<Offset> row_ptr(a.n_rows + 1, 0);
  Offset* counts = row_ptr.data() + 1;
  detail::ErrorSlot errors;

  const auto n_sort = static_cast<std::int64_t>(cats.sort_rows.size());
  const auto n_dense = static_cast<std::int64_t>(cats.dense_rows.size());
  const auto n_fine = static_cast<std::int64_t>(cats.fine_rows.size());
  const auto n_batches = static_cast<std::int64_t>(s.coarse_batches.size());

#pragma omp parallel num_threads(detail::worker_count(s.threads))
  {
    std::optional<Worker> w;
    errors.run([&] { w.emplace(s, plan, b.n_rows); });
    if (w) {
#pragma omp for schedule(dynamic, 64) nowait
      for (std::int64_t k = 0; k < n_sort; ++k) {
        const Index i = cats.sort_rows[k];
        errors.run([&] {
          expand_row(a, b, i, *w, false);
          counts[i] = w->sort.count_distinct(w->cols);
        });
      }
#pragma omp for schedule(dynamic, 16) nowait
      for (std::int64_t k = 0; k < n_dense; ++k) {
        const Index i = cats.dense_rows[k];
        errors.run([&] { counts[i] = symbolic_dense_row(a, b, i, s.stats.min_col[i], s.stats.range(i), *w); });
      }
#pragma omp for schedule(dynamic, 4) nowait
      for (std::int64_t k = 0; k < n_fine; ++k) {
        const Index i = cats.fine_rows[k];
        errors.run([&] {
          w->fine.reorder_row(a, b, i, Phase::Symbolic);
          counts[i] = w->fine.count_distinct();
        });
      }
#pragma omp for schedule(dynamic, 1) nowait
      for (std::int64_t k = 0; k < n_batches; ++k) {
        const auto& batch = s.coarse_batches[k];
        errors.run([&] {
          w->coarse.generate(a, b, batch, Phase::Symbolic);
          for (std::size_t r = 0; r < batch.size(); ++r) counts[batch[r]] = w->coarse.count_distinct_row(r);
        });
      }
    }
  }
  errors.rethrow();
  std::partial_sum(row_ptr.begin(), row_ptr.end(), row_ptr.begin());
  return row_ptr;
}

SpgemmResult magnus_numeric(const CsrMatrix& a, const CsrMatrix& b, std::vector<Offset> row_ptr,
                            const MagnusSetup& s) {
  detail::check_dims(a, b);
  if (s.stats.inter_size.size() != a.n_rows) throw ContractViolation("setup was computed for a different A");
  if (row_ptr.size() != a.n_rows + 1 || row_ptr.front() != 0) {
    throw ContractViolation("row_ptr does not match A");
  }
  detail::Stopwatch sw;
  const ChunkPlan& plan = s.plans.numeric;
  const auto& cats = s.categories;

  SpgemmResult result;
  CsrMatrix& c = result.c;
  c.n_rows = a.n_rows;
  c.n_cols = b.n_cols;
  c.row_ptr = std::move(row_ptr);
  c.col.resize(c.nnz());
  c.val.resize(c.nnz());
  detail::ErrorSlot errors;

  const auto n_sort = static_cast<std::int64_t>(cats.sort_rows.size());
  const auto n_dense = static_cast<std::int64_t>(cats.dense_rows.size());
  const auto n_fine = static_cast<std::int64_t>(cats.fine_rows.size());
  const auto n_batches = static_cast<std::int64_t>(s.coarse_batches.size());

#pragma omp parallel num_threads(detail::worker_count(s.threads))
  {
    std::optional<Worker> w;
    errors.run([&] { w.emplace(s, plan, b.n_rows); });
    if (w) {
#pragma omp for schedule(dynamic, 64) nowait
      for (std::int64_t k = 0; k < n_sort; ++k) {
        const Index i = cats.sort_rows[k];
        errors.run([&] {
          expand_row(a, b, i, *w, true);
          w->out_cols.resize(w->cols.size());
          w->out_vals.resize(w->cols.size());
          const std::size_t n = w->sort.accumulate(w->cols, w->vals, w->out_cols.data(), w->out_vals.data());
          RowWriter out(c, i);
          out(std::span<const Index>(w->out_cols.data(), n), std::span<const Real>(w->out_vals.data(), n));
          out.finish();
        });
      }
#pragma omp for schedule(dynamic, 16) nowait
      for (std::int64_t k = 0; k < n_dense; ++k) {
        const Index i = cats.dense_rows[k];
        errors.run([&] {
          const Index lo = s.stats.min_col[i];
          w->dense.reserve(s.stats.range(i));
          for (Offset ka = a.row_ptr[i]; ka < a.row_ptr[i + 1]; ++ka) {
            const Index j = a.col[ka];
            const Real av = a.val[ka];
            for (Offset kb = b.row_ptr[j]; kb < b.row_ptr[j + 1]; ++kb) w->dense.add(b.col[kb] - lo, av * b.val[kb]);
          }
          w->out_cols.resize(w->dense.count());
          w->out_vals.resize(w->dense.count());
          const std::size_t n = w->dense.drain(lo, w->out_cols.data(), w->out_vals.data());
          RowWriter out(c, i);
          out(std::span<const Index>(w->out_cols.data(), n), std::span<const Real>(w->out_vals.data(), n));
          out.finish();
        });
      }
#pragma omp for schedule(dynamic, 4) nowait
      for (std::int64_t k = 0; k < n_fine; ++k) {
        const Index i = cats.fine_rows[k];
        errors.run([&] {
          w->fine.reorder_row(a, b, i, Phase::Numeric);
          RowWriter out(c, i);
          w->fine.accumulate(0, out);
          out.finish();
        });
      }
#pragma omp for schedule(dynamic, 1) nowait
      for (std::int64_t k = 0; k < n_batches; ++k) {
        const auto& batch = s.coarse_batches[k];
        errors.run([&] {
          w->coarse.generate(a, b, batch, Phase::Numeric);
          for (std::size_t r = 0; r < batch.size(); ++r) {
            RowWriter out(c, batch[r]);
            w->coarse.accumulate_row(r, out);
            out.finish();
          }
        });
      }
    }
  }
  errors.rethrow();
  result.phase_seconds["numeric"] = sw.seconds();

  detail::Stopwatch canon;
  sort_rows(c, s.threads);
  result.phase_seconds["canonicalize"] = canon.seconds();

  result.counters["inter_prod_size"] = s.stats.total();
  result.counters["nnz_c"] = c.nnz();
  result.counters["rows_sort"] = cats.sort_rows.size();
  result.counters["rows_dense"] = cats.dense_rows.size();
  result.counters["rows_fine"] = cats.fine_rows.size();
  result.counters["rows_coarse"] = cats.coarse_rows.size();
  result.counters["coarse_batches"] = s.coarse_batches.size();
  result.counters["use_coarse"] = plan.use_coarse ? 1 : 0;
  result.counters["n_chunks_fine"] = plan.n_chunks_fine;
  result.counters["n_chunks_coarse"] = plan.n_chunks_coarse;
  result.warnings = s.warnings;
  return result;
}

SpgemmResult spgemm_magnus(const CsrMatrix& a, const CsrMatrix& b, const MagnusOptions& options) {
  detail::Stopwatch sw;
  const MagnusSetup setup = magnus_setup(a, b, options);
  const double t_setup = sw.lap();
  auto row_ptr = magnus_symbolic(a, b, setup);
  const double t_symbolic = sw.lap();
  auto result = magnus_numeric(a, b, std::move(row_ptr), setup);
  result.phase_seconds["setup"] = t_setup;
  result.phase_seconds["symbolic"] = t_symbolic;
  return result;
}

}  // namespace magnus
