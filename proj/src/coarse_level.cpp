#include "magnus/coarse_level.hpp"

#include <algorithm>
#include <string>

#include "magnus/errors.hpp"

namespace magnus {

void CoarseLevelWorkspace::configure(const ChunkPlan& plan, const AccumThresholds& thresholds, Index b_rows) {
  n_chunks_ = plan.n_chunks_coarse;
  chunk_len_ = plan.chunk_len_coarse;
  shift_ = plan.shift_coarse;
  b_bitmap_.assign(b_rows, 0);
  fine_.configure(plan.n_chunks_fine, plan.chunk_len_fine, thresholds, plan.phase);
}

void CoarseLevelWorkspace::generate(const CsrMatrix& a, const CsrMatrix& b, std::span<const Index> batch_rows,
                                    Phase phase) {
  batch_size_ = batch_rows.size();

  // Unique B rows referenced by the batch, ascending.
  rows_b_.clear();
  for (Index i : batch_rows) {
    for (Index j : a.row_cols(i)) {
      if (!b_bitmap_[j]) {
        b_bitmap_[j] = 1;
        rows_b_.push_back(j);
      }
    }
  }
  std::sort(rows_b_.begin(), rows_b_.end());
  for (Index j : rows_b_) b_bitmap_[j] = 0;

  csc_ = csr_rows_to_csc(a, batch_rows);

  // Histogram per (local row, coarse chunk).
  offsets_.assign(batch_size_ * n_chunks_ + 1, 0);
  Offset* counts = offsets_.data() + 1;
  for (Index j : rows_b_) {
    for (Offset k = csc_.col_ptr[j]; k < csc_.col_ptr[j + 1]; ++k) {
      Offset* row_counts = counts + csc_.row[k] * n_chunks_;
      for (Index c : b.row_cols(j)) {
        const Index chunk = c >> shift_;
        if (chunk >= n_chunks_) {
          throw ContractViolation("column " + std::to_string(c) + " beyond the coarse chunk range");
        }
        ++row_counts[chunk];
      }
    }
  }
  // Inclusive scan across rows: each row's chunk offsets continue from the
  // previous row's last offset.
  for (std::size_t k = 1; k < offsets_.size(); ++k) offsets_[k] += offsets_[k - 1];

  total_ = offsets_.back();
  has_vals_ = phase == Phase::Numeric;
  if (cols_.size() < total_) cols_.resize(total_);
  if (has_vals_ && vals_.size() < total_) vals_.resize(total_);
  cursor_.assign(offsets_.begin(), offsets_.end() - 1);

  for (Index j : rows_b_) {
    for (Offset k = csc_.col_ptr[j]; k < csc_.col_ptr[j + 1]; ++k) {
      Offset* row_cursor = cursor_.data() + csc_.row[k] * n_chunks_;
      const Real av = csc_.val[k];
      for (Offset kb = b.row_ptr[j]; kb < b.row_ptr[j + 1]; ++kb) {
        const Index c = b.col[kb];
        const Index chunk = c >> shift_;
        const Offset pos = row_cursor[chunk]++;
        cols_[pos] = c - (chunk << shift_);
        if (has_vals_) vals_[pos] = av * b.val[kb];
      }
    }
  }
}

std::size_t CoarseLevelWorkspace::count_distinct_row(std::size_t r) {
  std::size_t total = 0;
  for (Index c = 0; c < n_chunks_; ++c) {
    const Offset begin = offsets_[r * n_chunks_ + c];
    const Offset end = offsets_[r * n_chunks_ + c + 1];
    if (begin == end) continue;
    fine_.reorder(std::span<const Index>(cols_.data() + begin, end - begin), {});
    total += fine_.count_distinct();
  }
  return total;
}

}  // namespace magnus
