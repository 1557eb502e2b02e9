#include "magnus/fine_level.hpp"

#include <algorithm>
#include <string>

#include "magnus/errors.hpp"

namespace magnus {

void FineLevelWorkspace::configure(Index n_chunks, Index chunk_len, const AccumThresholds& thresholds,
                                   Phase phase) {
  if (n_chunks == 0 || chunk_len == 0 || !std::has_single_bit(chunk_len)) {
    throw ContractViolation("fine-level chunk length must be a positive power of two");
  }
  n_chunks_ = n_chunks;
  chunk_len_ = chunk_len;
  shift_ = log2_pow2(chunk_len);
  thresholds_ = thresholds;
  counts_.assign(n_chunks, 0);
  offsets_.assign(n_chunks + 1, 0);
  cursor_.assign(n_chunks, 0);
  dense_.reserve(chunk_len);
  if (phase == Phase::Numeric) dense_.enable_values();
  size_ = 0;
}

void FineLevelWorkspace::check_chunk(Index chunk) const {
  if (chunk >= n_chunks_) {
    throw ContractViolation("column in chunk " + std::to_string(chunk) + " outside the " +
                            std::to_string(n_chunks_) + " fine chunks");
  }
}

void FineLevelWorkspace::histogram_and_scan(std::span<const Index> cols) {
  std::fill(counts_.begin(), counts_.end(), 0);
  for (Index c : cols) {
    const Index chunk = c >> shift_;
    check_chunk(chunk);
    ++counts_[chunk];
  }
  offsets_[0] = 0;
  for (Index j = 0; j < n_chunks_; ++j) offsets_[j + 1] = offsets_[j] + counts_[j];
}

void FineLevelWorkspace::reorder(std::span<const Index> cols, std::span<const Real> vals) {
  if (!vals.empty() && vals.size() != cols.size()) throw InputError("cols and vals differ in length");
  histogram_and_scan(cols);
  size_ = cols.size();
  has_vals_ = !vals.empty();
  if (local_cols_.size() < size_) local_cols_.resize(size_);
  if (has_vals_ && local_vals_.size() < size_) local_vals_.resize(size_);

  std::copy(offsets_.begin(), offsets_.end() - 1, cursor_.begin());
  for (std::size_t k = 0; k < cols.size(); ++k) {
    const Index chunk = cols[k] >> shift_;
    const Offset pos = cursor_[chunk]++;
    local_cols_[pos] = cols[k] - (chunk << shift_);
    if (has_vals_) local_vals_[pos] = vals[k];
  }
}

void FineLevelWorkspace::reorder_row(const CsrMatrix& a, const CsrMatrix& b, Index row, Phase phase) {
  std::fill(counts_.begin(), counts_.end(), 0);
  for (Index j : a.row_cols(row)) {
    for (Index c : b.row_cols(j)) {
      const Index chunk = c >> shift_;
      check_chunk(chunk);
      ++counts_[chunk];
    }
  }
  offsets_[0] = 0;
  for (Index j = 0; j < n_chunks_; ++j) offsets_[j + 1] = offsets_[j] + counts_[j];
  size_ = offsets_[n_chunks_];
  has_vals_ = phase == Phase::Numeric;
  if (local_cols_.size() < size_) local_cols_.resize(size_);
  if (has_vals_ && local_vals_.size() < size_) local_vals_.resize(size_);

  std::copy(offsets_.begin(), offsets_.end() - 1, cursor_.begin());
  for (Offset ka = a.row_ptr[row]; ka < a.row_ptr[row + 1]; ++ka) {
    const Index j = a.col[ka];
    const Real av = a.val[ka];
    for (Offset kb = b.row_ptr[j]; kb < b.row_ptr[j + 1]; ++kb) {
      const Index c = b.col[kb];
      const Index chunk = c >> shift_;
      const Offset pos = cursor_[chunk]++;
      local_cols_[pos] = c - (chunk << shift_);
      if (has_vals_) local_vals_[pos] = av * b.val[kb];
    }
  }
}

std::size_t FineLevelWorkspace::accumulate_dense_chunk(Index chunk, Index column_offset) {
  const Offset begin = offsets_[chunk];
  const Offset end = offsets_[chunk + 1];
  for (Offset k = begin; k < end; ++k) dense_.add(local_cols_[k], local_vals_[k]);
  if (out_cols_.size() < dense_.count()) {
    out_cols_.resize(dense_.count());
    out_vals_.resize(dense_.count());
  }
  return dense_.drain(column_offset + (chunk << shift_), out_cols_.data(), out_vals_.data());
}

std::size_t FineLevelWorkspace::accumulate_sort_group(Index first_chunk, Index last_chunk, Index column_offset) {
  const Offset begin = offsets_[first_chunk];
  const Offset end = offsets_[last_chunk];
  const std::size_t n = end - begin;
  std::span<const Index> keys(local_cols_.data() + begin, n);
  if (last_chunk - first_chunk > 1) {
    // Re-express columns relative to the group's first chunk so one sort
    // covers every chunk of the group.
    group_cols_.resize(n);
    for (Index c = first_chunk; c < last_chunk; ++c) {
      const Index shift_by = (c - first_chunk) << shift_;
      for (Offset k = offsets_[c]; k < offsets_[c + 1]; ++k) group_cols_[k - begin] = local_cols_[k] + shift_by;
    }
    keys = group_cols_;
  }
  if (out_cols_.size() < n) {
    out_cols_.resize(n);
    out_vals_.resize(n);
  }
  const std::size_t written =
      sort_.accumulate(keys, std::span<const Real>(local_vals_.data() + begin, n), out_cols_.data(), out_vals_.data());
  const Index base = column_offset + (first_chunk << shift_);
  for (std::size_t k = 0; k < written; ++k) out_cols_[k] += base;
  return written;
}

std::size_t FineLevelWorkspace::count_distinct() {
  std::size_t total = 0;
  for (Index j = 0; j < n_chunks_; ++j) {
    const Offset begin = offsets_[j];
    const Offset end = offsets_[j + 1];
    if (begin == end) continue;
    std::span<const Index> chunk(local_cols_.data() + begin, end - begin);
    if (select_accumulator(chunk.size(), thresholds_) == AccumulatorKind::Sort) {
      total += sort_.count_distinct(chunk);
    } else {
      for (Index c : chunk) dense_.mark(c);
      total += dense_.drain_symbolic();
    }
  }
  return total;
}

AccumOutput fine_level_chunk(std::span<const Index> cols, std::span<const Real> vals, const ChunkPlan& plan,
                             const AccumThresholds& thresholds, Index column_offset) {
  FineLevelWorkspace ws(plan.n_chunks_fine, plan.chunk_len_fine, thresholds, Phase::Numeric);
  ws.reorder(cols, vals);
  AccumOutput out;
  ws.accumulate(column_offset, [&](std::span<const Index> c, std::span<const Real> v) {
    out.cols.insert(out.cols.end(), c.begin(), c.end());
    out.vals.insert(out.vals.end(), v.begin(), v.end());
  });
  return out;
}

}  // namespace magnus
