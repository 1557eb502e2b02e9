#include "magnus/system.hpp"

#include <bit>
#include <fstream>
#include <string>

#include <unistd.h>

#include "magnus/errors.hpp"

namespace magnus {
namespace {

// Parses sysfs sizes such as "2048K".
std::uint64_t read_sysfs_size(const char* path) {
  std::ifstream in(path);
  std::string text;
  if (!(in >> text) || text.empty()) return 0;
  std::uint64_t scale = 1;
  switch (text.back()) {
    case 'K': scale = 1024; text.pop_back(); break;
    case 'M': scale = 1024 * 1024; text.pop_back(); break;
    case 'G': scale = 1024 * 1024 * 1024; text.pop_back(); break;
    default: break;
  }
  try {
    return std::stoull(text) * scale;
  } catch (...) {
    return 0;
  }
}

}  // namespace

void SystemParams::validate() const {
  if (cache_line_bytes == 0 || !std::has_single_bit(cache_line_bytes)) {
    throw InputError("cache line size must be a positive power of two");
  }
  if (l2_bytes == 0 || memory_budget_bytes == 0 || histo_type_bytes == 0 || prefix_sum_type_bytes == 0 ||
      val_bytes == 0) {
    throw InputError("system parameters must be positive");
  }
}

DetectedSystem detect_system() {
  DetectedSystem d;
  auto& p = d.params;

  long line = sysconf(_SC_LEVEL1_DCACHE_LINESIZE);
  if (line <= 0) line = static_cast<long>(read_sysfs_size("/sys/devices/system/cpu/cpu0/cache/index0/coherency_line_size"));
  if (line > 0 && std::has_single_bit(static_cast<unsigned long>(line))) {
    p.cache_line_bytes = static_cast<std::uint64_t>(line);
  } else {
    d.warnings.emplace_back("cache line size unavailable, using 64 B");
  }

  long l2 = sysconf(_SC_LEVEL2_CACHE_SIZE);
  if (l2 <= 0) l2 = static_cast<long>(read_sysfs_size("/sys/devices/system/cpu/cpu0/cache/index2/size"));
  if (l2 > 0) {
    p.l2_bytes = static_cast<std::uint64_t>(l2);
  } else {
    d.warnings.emplace_back("L2 size unavailable, using 1 MiB");
  }

  const long pages = sysconf(_SC_PHYS_PAGES);
  const long page_size = sysconf(_SC_PAGESIZE);
  if (pages > 0 && page_size > 0) {
    p.memory_budget_bytes = static_cast<std::uint64_t>(pages) * static_cast<std::uint64_t>(page_size) / 4;
  } else {
    d.warnings.emplace_back("physical memory size unavailable, using a 1 GiB budget");
  }
  return d;
}

}  // namespace magnus
