#pragma once

#include <cassert>
#include <cstddef>
#include <cstdint>
#include <span>
#include <utility>
#include <vector>

#include "magnus/types.hpp"

namespace magnus {

/// Chunk-size thresholds for choosing an accumulator. Below
/// sort_dense_crossover elements a chunk is sorted; otherwise it is
/// accumulated densely. Runs of sorted chunks are grouped toward
/// sort_sweet_spot elements.
struct AccumThresholds {
  std::size_t sort_dense_crossover = 256;
  std::size_t sort_sweet_spot = 32;
};

enum class AccumulatorKind { Sort, Dense };

inline AccumulatorKind select_accumulator(std::size_t n_elems, const AccumThresholds& t) {
  return n_elems < t.sort_dense_crossover ? AccumulatorKind::Sort : AccumulatorKind::Dense;
}

/// Greedy left-to-right grouping of consecutive chunk sizes toward target.
/// A group closes when adding the next chunk would not bring its total
/// strictly closer to target. Returns boundaries b with b.front() == 0 and
/// b.back() == sizes.size(); group g spans chunks [b[g], b[g+1]).
std::vector<std::size_t> merge_chunks_for_sort(std::span<const std::size_t> sizes, std::size_t target);

/// Dense accumulator: a value buffer plus a one-byte-per-slot occupancy map
/// and the list of touched slots in first-touch order. Draining clears only
/// the touched slots, so the accumulator is never cleared in full.
class DenseAccumulator {
 public:
  DenseAccumulator() = default;
  explicit DenseAccumulator(std::size_t capacity) { reserve(capacity); }

  /// Grows capacity to at least n slots. Only valid while empty.
  void reserve(std::size_t n);
  std::size_t capacity() const { return bitmap_.size(); }
  std::size_t count() const { return touched_.size(); }

  void add(Index slot, Real v) {
    assert(slot < capacity());
    if (bitmap_[slot]) {
      buffer_[slot] += v;
    } else {
      bitmap_[slot] = 1;
      buffer_[slot] = v;
      touched_.push_back(slot);
    }
  }

  void mark(Index slot) {
    assert(slot < capacity());
    if (!bitmap_[slot]) {
      bitmap_[slot] = 1;
      touched_.push_back(slot);
    }
  }

  /// Writes (slot + base, value) pairs in first-touch order and resets.
  /// Returns the number of pairs written.
  std::size_t drain(Index base, Index* out_cols, Real* out_vals);

  /// Clears the occupancy of touched slots and returns how many there were.
  std::size_t drain_symbolic();

  /// True when no slot is marked; O(capacity), for tests.
  bool is_clear() const;

  /// Allocates value storage; symbolic-only users never call this.
  void enable_values() {
    values_ = true;
    buffer_.resize(bitmap_.size());
  }
  bool has_values() const { return values_; }

 private:
  std::vector<Real> buffer_;
  std::vector<std::uint8_t> bitmap_;
  std::vector<Index> touched_;
  bool values_ = false;
};

/// Sort-merge accumulator. Entries are ordered by (column, input position),
/// so equal columns are summed in input order and the result does not depend
/// on the sort algorithm.
class SortAccumulator {
 public:
  /// Merged output is written with strictly increasing columns; returns the
  /// number of entries written. Output may not alias the input.
  std::size_t accumulate(std::span<const Index> cols, std::span<const Real> vals, Index* out_cols, Real* out_vals);

  std::size_t count_distinct(std::span<const Index> cols);

 private:
  void sort_keys(std::span<const Index> cols);
  std::vector<std::pair<Index, std::uint32_t>> keys_;
  std::vector<Index> plain_;
};

struct AccumOutput {
  std::vector<Index> cols;
  std::vector<Real> vals;
};

/// Dense accumulation of one stream. acc must be empty; it is empty again on
/// return. Throws ContractViolation if an index is >= acc.capacity().
AccumOutput dense_accumulate(std::span<const Index> cols, std::span<const Real> vals, DenseAccumulator& acc);

/// Number of distinct indices, touching only the occupancy map.
std::size_t dense_accumulate_symbolic(std::span<const Index> cols, DenseAccumulator& acc);

AccumOutput sort_accumulate(std::span<const Index> cols, std::span<const Real> vals);

}  // namespace magnus
