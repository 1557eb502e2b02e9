#pragma once

#include <optional>
#include <string>
#include <vector>

#include "magnus/accumulators.hpp"
#include "magnus/gustavson.hpp"
#include "magnus/planner.hpp"
#include "magnus/system.hpp"

namespace magnus {

struct MagnusOptions {
  std::optional<SystemParams> system;  // detected from the host when empty
  AccumThresholds thresholds;
  bool force_fine_only = false;  // never use the coarse level
  int threads = 0;               // 0: OpenMP default
};

/// Everything computed before the symbolic phase; shared by both phases so
/// they see the same categories and batches.
struct MagnusSetup {
  SystemParams system;
  AccumThresholds thresholds;
  RowStats stats;
  PhasePlans plans;
  RowCategories categories;
  std::vector<std::vector<Index>> coarse_batches;
  std::vector<std::string> warnings;
  int threads = 0;
};

/// Row statistics, per-phase plans, categorization (against the numeric
/// plan, whose coarse decision is the symbolic one) and coarse batches.
MagnusSetup magnus_setup(const CsrMatrix& a, const CsrMatrix& b, const MagnusOptions& options);

/// Exact row pointer of A * B.
std::vector<Offset> magnus_symbolic(const CsrMatrix& a, const CsrMatrix& b, const MagnusSetup& setup);

/// Fills C for a row pointer produced by magnus_symbolic with the same setup.
SpgemmResult magnus_numeric(const CsrMatrix& a, const CsrMatrix& b, std::vector<Offset> row_ptr,
                            const MagnusSetup& setup);

/// Setup, symbolic and numeric phases with timings and category counters.
SpgemmResult spgemm_magnus(const CsrMatrix& a, const CsrMatrix& b, const MagnusOptions& options = {});

}  // namespace magnus
