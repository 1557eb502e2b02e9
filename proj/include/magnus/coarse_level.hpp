#pragma once

#include <cstddef>
#include <span>
#include <vector>

#include "magnus/fine_level.hpp"
#include "magnus/planner.hpp"
#include "magnus/sparse.hpp"

namespace magnus {

/// Worker-local state of the coarse-level algorithm for one batch of rows.
///
/// generate() runs the outer-product pass: it collects the B rows the batch
/// references, builds the CSC form of the batch's rows of A, histograms every
/// intermediate element by (row, col >> shift_coarse), scans the counts row
/// after row, and scatters chunk-local columns and products into one buffer.
/// The whole batch is reordered before any accumulation; accumulate_row()
/// then runs the fine level over one row's coarse chunks, one chunk at a
/// time.
class CoarseLevelWorkspace {
 public:
  void configure(const ChunkPlan& plan, const AccumThresholds& thresholds, Index b_rows);

  void generate(const CsrMatrix& a, const CsrMatrix& b, std::span<const Index> batch_rows, Phase phase);

  Index n_chunks() const { return n_chunks_; }
  Index chunk_len() const { return chunk_len_; }
  std::size_t batch_size() const { return batch_size_; }
  std::span<const Index> coarse_rows_b() const { return rows_b_; }
  const CscSubMatrix& csc() const { return csc_; }
  /// batch_size * n_chunks + 1 entries; chunk c of local row r spans
  /// [offsets[r * n_chunks + c], offsets[r * n_chunks + c + 1]).
  std::span<const Offset> offsets() const { return offsets_; }
  std::span<const Index> coarse_cols() const { return {cols_.data(), total_}; }
  std::span<const Real> coarse_vals() const { return {vals_.data(), has_vals_ ? total_ : 0}; }

  FineLevelWorkspace& fine() { return fine_; }

  /// Fine level over each coarse chunk of local row r, in chunk order.
  /// emit receives global columns.
  template <class Emit>
  void accumulate_row(std::size_t r, Emit&& emit) {
    for (Index c = 0; c < n_chunks_; ++c) {
      const Offset begin = offsets_[r * n_chunks_ + c];
      const Offset end = offsets_[r * n_chunks_ + c + 1];
      if (begin == end) continue;
      fine_.reorder(std::span<const Index>(cols_.data() + begin, end - begin),
                    std::span<const Real>(vals_.data() + begin, end - begin));
      fine_.accumulate(c * chunk_len_, emit);
    }
  }

  std::size_t count_distinct_row(std::size_t r);

 private:
  Index n_chunks_ = 1;
  Index chunk_len_ = 1;
  unsigned shift_ = 0;
  std::size_t batch_size_ = 0;
  std::vector<std::uint8_t> b_bitmap_;
  std::vector<Index> rows_b_;
  CscSubMatrix csc_;
  std::vector<Offset> offsets_;
  std::vector<Offset> cursor_;
  std::vector<Index> cols_;
  std::vector<Real> vals_;
  std::size_t total_ = 0;
  bool has_vals_ = false;
  FineLevelWorkspace fine_;
};

}  // namespace magnus
