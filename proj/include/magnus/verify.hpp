#pragma once

#include <cstdint>
#include <map>
#include <optional>
#include <string>
#include <vector>

#include "magnus/spgemm.hpp"

namespace magnus {

struct VerifyCase {
  std::string name;
  CsrMatrix a;
  CsrMatrix b;
  bool integer_values = true;
  std::optional<SystemParams> system;  // MAGNUS runs use defaults when empty
  AccumThresholds thresholds;
};

struct VerifyConfig {
  std::size_t n_random = 200;  // randomized oracle cases
  std::uint64_t seed = 1;
  bool fixed = true;           // identities, zero, high-fill blocks, generators
  bool toy_sweep = true;       // forced categorization under toy caches
  std::string filter;          // substring on case names; empty keeps all
  std::string inject_fault;    // perturbs magnus output of cases whose name contains this
  int threads = 0;
};

struct VerifyOutcome {
  std::string case_name;
  Algorithm algo = Algorithm::Magnus;
  bool passed = false;
  std::string message;
  double seconds = 0.0;
};

struct VerifyReport {
  std::vector<VerifyOutcome> outcomes;
  std::map<std::string, std::uint64_t> magnus_counters;  // rows_* and coarse_batches summed over magnus runs
  std::size_t n_cases = 0;

  bool passed() const;
  std::size_t failures() const;
};

/// Compares structure exactly and values exactly (integer) or to a relative
/// tolerance of 1e-5. Returns an empty string on success.
std::string compare_to_oracle(const CsrMatrix& got, const CsrMatrix& oracle, bool integer_values);

/// Random A, B with shapes in [1, 128] and densities from empty to dense.
/// Every fourth case has random real values; every third MAGNUS run uses a
/// micro cache so that all four row categories appear at this size.
std::vector<VerifyCase> random_cases(std::size_t n, std::uint64_t seed);

/// Identity, zero, complete bipartite blocks and generator outputs, squared.
std::vector<VerifyCase> fixed_cases(std::uint64_t seed);

/// Wide B with narrow and wide rows under l2 in {4 KiB, 64 KiB, 1 MiB},
/// including memory budgets that force several coarse batches.
std::vector<VerifyCase> toy_sweep_cases(std::uint64_t seed);

/// Builds the selected corpus (InputError if the selection is empty) and
/// checks every algorithm against spgemm_reference.
VerifyReport run_verify(const VerifyConfig& config);

}  // namespace magnus
