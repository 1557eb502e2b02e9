#pragma once

#include <cstddef>
#include <span>
#include <vector>

#include "magnus/accumulators.hpp"
#include "magnus/planner.hpp"
#include "magnus/sparse.hpp"

namespace magnus {

/// Worker-local state of the fine-level algorithm: histogram, offsets,
/// the reordered stream and the chunk-sized accumulators.
///
/// A stream is processed in two steps. reorder() (or reorder_row(), which
/// generates the stream from A and B) buckets elements by col >> shift and
/// stores each as its chunk-local column, keeping input order inside a
/// chunk. accumulate() then visits the chunks in order: chunks with at least
/// sort_dense_crossover elements go through the dense accumulator, runs of
/// smaller chunks are grouped toward sort_sweet_spot elements and sorted.
class FineLevelWorkspace {
 public:
  FineLevelWorkspace() = default;
  FineLevelWorkspace(Index n_chunks, Index chunk_len, const AccumThresholds& thresholds, Phase phase) {
    configure(n_chunks, chunk_len, thresholds, phase);
  }

  void configure(Index n_chunks, Index chunk_len, const AccumThresholds& thresholds, Phase phase);

  Index n_chunks() const { return n_chunks_; }
  Index chunk_len() const { return chunk_len_; }
  unsigned shift() const { return shift_; }

  /// vals may be empty (symbolic). Every column must be below
  /// n_chunks * chunk_len, else ContractViolation.
  void reorder(std::span<const Index> cols, std::span<const Real> vals);

  /// Reorders the intermediate product of row `row` of A * B without
  /// materializing it unordered: one pass over A and B to histogram, a second
  /// to multiply and scatter.
  void reorder_row(const CsrMatrix& a, const CsrMatrix& b, Index row, Phase phase);

  std::span<const Offset> counts() const { return counts_; }
  std::span<const Offset> offsets() const { return offsets_; }
  std::span<const Index> local_cols() const { return {local_cols_.data(), size_}; }
  std::span<const Real> local_vals() const { return {local_vals_.data(), has_vals_ ? size_ : 0}; }

  /// Accumulates the reordered stream. emit(cols, vals) is called once per
  /// accumulated group with columns already shifted to column_offset +
  /// chunk * chunk_len + local. Groups arrive in ascending column range.
  template <class Emit>
  void accumulate(Index column_offset, Emit&& emit);

  /// Symbolic counterpart of accumulate(): number of distinct columns.
  std::size_t count_distinct();

 private:
  void histogram_and_scan(std::span<const Index> cols);
  void check_chunk(Index chunk) const;
  std::size_t accumulate_dense_chunk(Index chunk, Index column_offset);
  std::size_t accumulate_sort_group(Index first_chunk, Index last_chunk, Index column_offset);

  Index n_chunks_ = 1;
  Index chunk_len_ = 1;
  unsigned shift_ = 0;
  AccumThresholds thresholds_;
  std::vector<Offset> counts_;
  std::vector<Offset> offsets_;
  std::vector<Offset> cursor_;
  std::vector<Index> local_cols_;
  std::vector<Real> local_vals_;
  std::size_t size_ = 0;
  bool has_vals_ = false;
  DenseAccumulator dense_;
  SortAccumulator sort_;
  std::vector<Index> group_cols_;
  std::vector<Index> out_cols_;
  std::vector<Real> out_vals_;
  std::vector<std::size_t> run_sizes_;
};

template <class Emit>
void FineLevelWorkspace::accumulate(Index column_offset, Emit&& emit) {
  Index j = 0;
  while (j < n_chunks_) {
    if (select_accumulator(counts_[j], thresholds_) == AccumulatorKind::Dense) {
      const std::size_t n = accumulate_dense_chunk(j, column_offset);
      emit(std::span<const Index>(out_cols_.data(), n), std::span<const Real>(out_vals_.data(), n));
      ++j;
      continue;
    }
    const Index run_begin = j;
    run_sizes_.clear();
    while (j < n_chunks_ && select_accumulator(counts_[j], thresholds_) == AccumulatorKind::Sort) {
      run_sizes_.push_back(counts_[j]);
      ++j;
    }
    const auto bounds = merge_chunks_for_sort(run_sizes_, thresholds_.sort_sweet_spot);
    for (std::size_t g = 0; g + 1 < bounds.size(); ++g) {
      const Index first = run_begin + bounds[g];
      const Index last = run_begin + bounds[g + 1];
      if (offsets_[first] == offsets_[last]) continue;
      const std::size_t n = accumulate_sort_group(first, last, column_offset);
      emit(std::span<const Index>(out_cols_.data(), n), std::span<const Real>(out_vals_.data(), n));
    }
  }
}

/// Applies the fine-level algorithm to one explicit stream (a coarse chunk)
/// and returns the accumulated (column, value) pairs in emission order.
AccumOutput fine_level_chunk(std::span<const Index> cols, std::span<const Real> vals, const ChunkPlan& plan,
                             const AccumThresholds& thresholds, Index column_offset = 0);

}  // namespace magnus
