#include "magnus/accumulators.hpp"

#include <algorithm>
#include <string>

#include "magnus/errors.hpp"

namespace magnus {

std::vector<std::size_t> merge_chunks_for_sort(std::span<const std::size_t> sizes, std::size_t target) {
  std::vector<std::size_t> bounds{0};
  if (sizes.empty()) return bounds;
  auto distance = [target](std::size_t total) {
    return total > target ? total - target : target - total;
  };
  std::size_t total = sizes[0];
  for (std::size_t k = 1; k < sizes.size(); ++k) {
    if (distance(total + sizes[k]) < distance(total)) {
      total += sizes[k];
    } else {
      bounds.push_back(k);
      total = sizes[k];
    }
  }
  bounds.push_back(sizes.size());
  return bounds;
}

void DenseAccumulator::reserve(std::size_t n) {
  if (n <= bitmap_.size()) return;
  bitmap_.resize(n, 0);
  if (values_) buffer_.resize(n);
}

std::size_t DenseAccumulator::drain(Index base, Index* out_cols, Real* out_vals) {
  const std::size_t n = touched_.size();
  for (std::size_t k = 0; k < n; ++k) {
    const Index slot = touched_[k];
    out_cols[k] = slot + base;
    out_vals[k] = buffer_[slot];
    bitmap_[slot] = 0;
  }
  touched_.clear();
  return n;
}

std::size_t DenseAccumulator::drain_symbolic() {
  const std::size_t n = touched_.size();
  for (Index slot : touched_) bitmap_[slot] = 0;
  touched_.clear();
  return n;
}

bool DenseAccumulator::is_clear() const {
  return touched_.empty() && std::none_of(bitmap_.begin(), bitmap_.end(), [](std::uint8_t b) { return b != 0; });
}

void SortAccumulator::sort_keys(std::span<const Index> cols) {
  keys_.resize(cols.size());
  for (std::size_t k = 0; k < cols.size(); ++k) keys_[k] = {cols[k], static_cast<std::uint32_t>(k)};
  if (keys_.size() <= 16) {
    // Insertion sort for the short chunks the grouping produces.
    for (std::size_t i = 1; i < keys_.size(); ++i) {
      auto key = keys_[i];
      std::size_t j = i;
      while (j > 0 && key < keys_[j - 1]) {
        keys_[j] = keys_[j - 1];
        --j;
      }
      keys_[j] = key;
    }
  } else {
    std::sort(keys_.begin(), keys_.end());
  }
}

std::size_t SortAccumulator::accumulate(std::span<const Index> cols, std::span<const Real> vals, Index* out_cols,
                                        Real* out_vals) {
  if (cols.empty()) return 0;
  sort_keys(cols);
  std::size_t n = 0;
  out_cols[0] = keys_[0].first;
  out_vals[0] = vals[keys_[0].second];
  for (std::size_t k = 1; k < keys_.size(); ++k) {
    if (keys_[k].first == out_cols[n]) {
      out_vals[n] += vals[keys_[k].second];
    } else {
      ++n;
      out_cols[n] = keys_[k].first;
      out_vals[n] = vals[keys_[k].second];
    }
  }
  return n + 1;
}

std::size_t SortAccumulator::count_distinct(std::span<const Index> cols) {
  plain_.assign(cols.begin(), cols.end());
  std::sort(plain_.begin(), plain_.end());
  return static_cast<std::size_t>(std::unique(plain_.begin(), plain_.end()) - plain_.begin());
}

namespace {

void check_capacity(std::span<const Index> cols, const DenseAccumulator& acc) {
  for (std::size_t k = 0; k < cols.size(); ++k) {
    if (cols[k] >= acc.capacity()) {
      throw ContractViolation("index " + std::to_string(cols[k]) + " at position " + std::to_string(k) +
                              " exceeds accumulator capacity " + std::to_string(acc.capacity()));
    }
  }
}

}  // namespace

AccumOutput dense_accumulate(std::span<const Index> cols, std::span<const Real> vals, DenseAccumulator& acc) {
  if (cols.size() != vals.size()) throw InputError("cols and vals differ in length");
  check_capacity(cols, acc);
  if (!acc.has_values()) acc.enable_values();
  for (std::size_t k = 0; k < cols.size(); ++k) acc.add(cols[k], vals[k]);
  AccumOutput out;
  out.cols.resize(acc.count());
  out.vals.resize(acc.count());
  acc.drain(0, out.cols.data(), out.vals.data());
  return out;
}

std::size_t dense_accumulate_symbolic(std::span<const Index> cols, DenseAccumulator& acc) {
  check_capacity(cols, acc);
  for (Index c : cols) acc.mark(c);
  return acc.drain_symbolic();
}

AccumOutput sort_accumulate(std::span<const Index> cols, std::span<const Real> vals) {
  if (cols.size() != vals.size()) throw InputError("cols and vals differ in length");
  AccumOutput out;
  out.cols.resize(cols.size());
  out.vals.resize(cols.size());
  SortAccumulator acc;
  const std::size_t n = acc.accumulate(cols, vals, out.cols.data(), out.vals.data());
  out.cols.resize(n);
  out.vals.resize(n);
  return out;
}

}  // namespace magnus
