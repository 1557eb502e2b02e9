#pragma once

#include <cstdint>
#include <span>
#include <vector>

#include "magnus/accumulators.hpp"
#include "magnus/gustavson.hpp"
#include "magnus/system.hpp"
#include "magnus/types.hpp"

namespace magnus {

enum class Phase { Symbolic, Numeric };

/// Chunk geometry for one phase.
///
/// Fine chunks tile [0, n_chunks_fine * chunk_len_fine), which is the whole
/// padded column range when use_coarse is false and one coarse chunk
/// (m_c_max_l2 columns) otherwise. All counts and lengths are powers of two.
struct ChunkPlan {
  Phase phase = Phase::Numeric;
  std::uint64_t s_dense_accum = 0;  // accumulator bytes per column slot
  std::uint64_t s_chunk_fine = 0;   // reorder bytes per fine chunk
  Index padded_cols = 1;            // m_C rounded up to a power of two
  Index n_chunks_fine = 1;
  Index chunk_len_fine = 1;
  unsigned shift_fine = 0;
  Index m_c_max_l2 = 1;
  bool use_coarse = false;
  Index n_chunks_coarse = 1;
  Index chunk_len_coarse = 1;
  unsigned shift_coarse = 0;
};

/// Storage of the L2-resident fine-level structures for m columns split into
/// n_chunks chunks: m * s_dense / n_chunks + n_chunks * s_chunk.
double fine_level_storage(Index m, Index n_chunks, std::uint64_t s_dense, std::uint64_t s_chunk);

/// The same storage at the real-valued optimum, 2 * sqrt(m * s_dense * s_chunk).
double optimal_fine_level_storage(Index m, std::uint64_t s_dense, std::uint64_t s_chunk);

/// Largest power-of-two column count whose optimal fine-level storage fits
/// in l2: floor_pow2(l2^2 / (4 * s_dense * s_chunk)), at least 1.
Index max_l2_columns(std::uint64_t l2_bytes, std::uint64_t s_dense, std::uint64_t s_chunk);

std::uint64_t dense_accum_bytes(const SystemParams& sys, Phase phase);
std::uint64_t chunk_fine_bytes(const SystemParams& sys);

/// Plans chunking for a product with m_c columns. The fine chunk count is
/// sqrt(m * s_dense / s_chunk) rounded to the nearest power of two on the
/// log2 scale (ties round up), clamped to >= 1 chunk and chunk lengths of at
/// least one cache line of indices. use_coarse is set when the optimal
/// fine-level storage for the padded column count exceeds l2_bytes and
/// allow_coarse is true.
ChunkPlan compute_chunk_plan(const SystemParams& sys, Index m_c, Phase phase, bool allow_coarse = true);

struct PhasePlans {
  ChunkPlan symbolic;
  ChunkPlan numeric;
};

/// Plans for both phases of one product. The coarse decision and coarse
/// geometry come from the symbolic plan and are shared; only the fine chunk
/// count differs, following each phase's accumulator size.
PhasePlans compute_phase_plans(const SystemParams& sys, Index m_c, bool allow_coarse = true);

enum class RowCategory : std::uint8_t { Sort, Dense, FineLevel, CoarseLevel };

struct RowCategories {
  std::vector<Index> sort_rows;
  std::vector<Index> dense_rows;
  std::vector<Index> fine_rows;
  std::vector<Index> coarse_rows;

  std::size_t total() const {
    return sort_rows.size() + dense_rows.size() + fine_rows.size() + coarse_rows.size();
  }
};

/// First matching rule wins: fewer intermediate elements than the sort/dense
/// crossover -> Sort; column span * s_dense_accum <= l2 -> Dense; plan
/// without coarse level -> FineLevel; otherwise CoarseLevel.
RowCategory categorize_row(Offset inter_size, Index range, const ChunkPlan& plan, const SystemParams& sys,
                           const AccumThresholds& thresholds);

RowCategories categorize_rows(const RowStats& stats, const ChunkPlan& plan, const SystemParams& sys,
                              const AccumThresholds& thresholds);

/// Bytes buffered per coarse-level intermediate element (column + value).
inline constexpr std::uint64_t kCoarseElementBytes = sizeof(Index) + sizeof(Real);

/// Bytes of per-row chunking metadata in a coarse batch: a count, an offset
/// and two active cache lines for every coarse chunk.
std::uint64_t coarse_row_metadata_bytes(const ChunkPlan& plan, const SystemParams& sys);

/// Greedy batching of coarse rows. A batch closes before a row that would
/// push buffered elements past memory_budget_bytes or batch metadata past
/// l2_bytes; a batch always holds at least one row. Throws BudgetError if a
/// single row alone exceeds the memory budget.
std::vector<std::vector<Index>> build_coarse_batches(std::span<const Index> coarse_rows, const RowStats& stats,
                                                     const ChunkPlan& plan, const SystemParams& sys);

}  // namespace magnus
