#pragma once

#include <cstdint>
#include <string>
#include <vector>

namespace magnus {

/// Host description used to size chunks. Byte sizes throughout.
struct SystemParams {
  std::uint64_t cache_line_bytes = 64;
  std::uint64_t l2_bytes = std::uint64_t{1} << 20;
  std::uint64_t memory_budget_bytes = std::uint64_t{1} << 30;  // cap on buffered coarse-level elements
  std::uint64_t histo_type_bytes = 4;
  std::uint64_t prefix_sum_type_bytes = 4;
  std::uint64_t val_bytes = 8;

  /// Throws InputError unless every field is positive and the cache line is
  /// a power of two.
  void validate() const;
};

struct DetectedSystem {
  SystemParams params;
  std::vector<std::string> warnings;  // one per field that fell back to a default
};

/// Queries cache line, per-core L2 and physical memory. The memory budget
/// is a quarter of physical memory. Anything the host does not report falls
/// back to 64 B lines, 1 MiB L2 and a 1 GiB budget.
DetectedSystem detect_system();

}  // namespace magnus
