#include "magnus/planner.hpp"

#include <algorithm>
#include <cmath>
#include <string>

#include "magnus/errors.hpp"

namespace magnus {
namespace {

struct FineGeometry {
  Index n_chunks;
  Index chunk_len;
};

FineGeometry fine_geometry(Index range, std::uint64_t s_dense, std::uint64_t s_chunk, std::uint64_t line_bytes) {
  const long double raw = std::sqrt(static_cast<long double>(range) * s_dense / s_chunk);
  long double e = raw > 0 ? std::floor(std::log2(raw) + 0.5L) : 0;
  e = std::clamp<long double>(e, 0, 63);
  Index n = Index{1} << static_cast<unsigned>(e);
  n = std::min(n, range);
  const Index min_len = std::min(range, std::max<Index>(1, line_bytes / sizeof(Index)));
  if (range / n < min_len) n = range / min_len;
  return {n, range / n};
}

void set_fine(ChunkPlan& plan, Index range, std::uint64_t line_bytes) {
  const auto g = fine_geometry(range, plan.s_dense_accum, plan.s_chunk_fine, line_bytes);
  plan.n_chunks_fine = g.n_chunks;
  plan.chunk_len_fine = g.chunk_len;
  plan.shift_fine = log2_pow2(g.chunk_len);
}

void set_coarse(ChunkPlan& plan, Index m_c_max_l2) {
  plan.use_coarse = true;
  plan.m_c_max_l2 = m_c_max_l2;
  plan.n_chunks_coarse = plan.padded_cols / m_c_max_l2;
  plan.chunk_len_coarse = m_c_max_l2;
  plan.shift_coarse = log2_pow2(m_c_max_l2);
}

void set_fine_only(ChunkPlan& plan) {
  plan.use_coarse = false;
  plan.m_c_max_l2 = plan.padded_cols;
  plan.n_chunks_coarse = 1;
  plan.chunk_len_coarse = plan.padded_cols;
  plan.shift_coarse = log2_pow2(plan.padded_cols);
}

ChunkPlan base_plan(const SystemParams& sys, Index m_c, Phase phase) {
  sys.validate();
  ChunkPlan plan;
  plan.phase = phase;
  plan.s_dense_accum = dense_accum_bytes(sys, phase);
  plan.s_chunk_fine = chunk_fine_bytes(sys);
  plan.padded_cols = ceil_pow2(std::max<Index>(m_c, 1));
  return plan;
}

}  // namespace

double fine_level_storage(Index m, Index n_chunks, std::uint64_t s_dense, std::uint64_t s_chunk) {
  return static_cast<double>(m) * static_cast<double>(s_dense) / static_cast<double>(n_chunks) +
         static_cast<double>(n_chunks) * static_cast<double>(s_chunk);
}

double optimal_fine_level_storage(Index m, std::uint64_t s_dense, std::uint64_t s_chunk) {
  return 2.0 * std::sqrt(static_cast<double>(m) * static_cast<double>(s_dense) * static_cast<double>(s_chunk));
}

Index max_l2_columns(std::uint64_t l2_bytes, std::uint64_t s_dense, std::uint64_t s_chunk) {
  const unsigned __int128 num = static_cast<unsigned __int128>(l2_bytes) * l2_bytes;
  const unsigned __int128 den = static_cast<unsigned __int128>(4) * s_dense * s_chunk;
  const unsigned __int128 q = num / den;
  if (q == 0) return 1;
  const auto hi = static_cast<std::uint64_t>(q >> 64);
  if (hi != 0) return Index{1} << 63;
  return floor_pow2(static_cast<std::uint64_t>(q));
}

std::uint64_t dense_accum_bytes(const SystemParams& sys, Phase phase) {
  return phase == Phase::Numeric ? sys.val_bytes + 1 : 1;
}

std::uint64_t chunk_fine_bytes(const SystemParams& sys) {
  return sys.histo_type_bytes + sys.prefix_sum_type_bytes + 2 * sys.cache_line_bytes;
}

ChunkPlan compute_chunk_plan(const SystemParams& sys, Index m_c, Phase phase, bool allow_coarse) {
  ChunkPlan plan = base_plan(sys, m_c, phase);
  // 2 * sqrt(m * s_dense * s_chunk) > l2, compared exactly in integers.
  const unsigned __int128 lhs =
      static_cast<unsigned __int128>(4) * plan.padded_cols * plan.s_dense_accum * plan.s_chunk_fine;
  const unsigned __int128 rhs = static_cast<unsigned __int128>(sys.l2_bytes) * sys.l2_bytes;
  if (allow_coarse && lhs > rhs) {
    Index m_max = max_l2_columns(sys.l2_bytes, plan.s_dense_accum, plan.s_chunk_fine);
    m_max = std::min(m_max, plan.padded_cols);
    set_coarse(plan, m_max);
  } else {
    set_fine_only(plan);
  }
  set_fine(plan, plan.m_c_max_l2, sys.cache_line_bytes);
  return plan;
}

PhasePlans compute_phase_plans(const SystemParams& sys, Index m_c, bool allow_coarse) {
  PhasePlans plans;
  plans.symbolic = compute_chunk_plan(sys, m_c, Phase::Symbolic, allow_coarse);
  ChunkPlan numeric = base_plan(sys, m_c, Phase::Numeric);
  if (plans.symbolic.use_coarse) {
    set_coarse(numeric, plans.symbolic.m_c_max_l2);
  } else {
    set_fine_only(numeric);
  }
  set_fine(numeric, numeric.m_c_max_l2, sys.cache_line_bytes);
  plans.numeric = numeric;
  return plans;
}

RowCategory categorize_row(Offset inter_size, Index range, const ChunkPlan& plan, const SystemParams& sys,
                           const AccumThresholds& thresholds) {
  if (inter_size == 0 || select_accumulator(inter_size, thresholds) == AccumulatorKind::Sort) {
    return RowCategory::Sort;
  }
  const unsigned __int128 window = static_cast<unsigned __int128>(range) * plan.s_dense_accum;
  if (window <= sys.l2_bytes) return RowCategory::Dense;
  if (!plan.use_coarse) return RowCategory::FineLevel;
  return RowCategory::CoarseLevel;
}

RowCategories categorize_rows(const RowStats& stats, const ChunkPlan& plan, const SystemParams& sys,
                              const AccumThresholds& thresholds) {
  RowCategories cats;
  for (Index i = 0; i < stats.inter_size.size(); ++i) {
    switch (categorize_row(stats.inter_size[i], stats.range(i), plan, sys, thresholds)) {
      case RowCategory::Sort: cats.sort_rows.push_back(i); break;
      case RowCategory::Dense: cats.dense_rows.push_back(i); break;
      case RowCategory::FineLevel: cats.fine_rows.push_back(i); break;
      case RowCategory::CoarseLevel: cats.coarse_rows.push_back(i); break;
    }
  }
  return cats;
}

std::uint64_t coarse_row_metadata_bytes(const ChunkPlan& plan, const SystemParams& sys) {
  return plan.n_chunks_coarse * (sys.histo_type_bytes + sys.prefix_sum_type_bytes + 2 * sys.cache_line_bytes);
}

std::vector<std::vector<Index>> build_coarse_batches(std::span<const Index> coarse_rows, const RowStats& stats,
                                                     const ChunkPlan& plan, const SystemParams& sys) {
  std::vector<std::vector<Index>> batches;
  const std::uint64_t meta = coarse_row_metadata_bytes(plan, sys);
  const std::uint64_t max_elements = sys.memory_budget_bytes / kCoarseElementBytes;
  std::vector<Index> current;
  std::uint64_t elements = 0;
  for (Index row : coarse_rows) {
    const Offset size = stats.inter_size[row];
    if (size > max_elements) {
      throw BudgetError("coarse row " + std::to_string(row) + " needs " + std::to_string(size * kCoarseElementBytes) +
                            " bytes, over the memory budget of " + std::to_string(sys.memory_budget_bytes),
                        row);
    }
    const bool over_memory = elements + size > max_elements;
    const bool over_l2 = (current.size() + 1) * meta > sys.l2_bytes;
    if (!current.empty() && (over_memory || over_l2)) {
      batches.push_back(std::move(current));
      current.clear();
      elements = 0;
    }
    current.push_back(row);
    elements += size;
  }
  if (!current.empty()) batches.push_back(std::move(current));
  return batches;
}

}  // namespace magnus
