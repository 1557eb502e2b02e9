#pragma once

#include <cstdint>
#include <iosfwd>
#include <map>
#include <optional>
#include <span>
#include <string>
#include <utility>
#include <vector>

#include "magnus/spgemm.hpp"

namespace magnus {

struct IdealBoundInputs {
  std::uint64_t n_a = 0;
  std::uint64_t nnz_a = 0;
  std::uint64_t n_inter_prod = 0;
  std::uint64_t n_c = 0;
  std::uint64_t nnz_c = 0;
  std::uint64_t s_row_ptr = 8;
  std::uint64_t s_col_idx = 4;
  std::uint64_t s_val = 8;
  double bandwidth_bytes_per_sec = 1.0;
};

struct IdealBound {
  std::uint64_t read_bytes = 0;
  std::uint64_t write_bytes = 0;
  double seconds = 0.0;
};

/// Minimum data volume of a row-wise SpGEMM:
///   read  = 2 (nA + 1) sRowPtr + nnzA (4 sRowPtr + 2 sColIdx + sVal) + nInterProd (2 sColIdx + sVal)
///   write = (nC + 1) sRowPtr + nnzC (sColIdx + sVal)
/// and seconds = (read + write) / bandwidth. Throws InputError for a
/// non-positive bandwidth.
IdealBound ideal_bound(const IdealBoundInputs& in);

/// Inputs for C = A * B; column-index width follows C.
IdealBoundInputs ideal_bound_inputs(const CsrMatrix& a, const SpgemmResult& result, double bandwidth);

struct BenchRecord {
  std::string benchmark;
  std::vector<std::pair<std::string, std::string>> params;
  double seconds = 0.0;
  double rate = 0.0;  // elements or bytes per second, see unit
  std::string unit;
  std::size_t repetition = 0;
  bool check_ok = true;
};

/// Fixed header: benchmark,params,repetition,seconds,rate,unit,check
/// params are written as key=value pairs joined by ';'.
void write_csv(std::ostream& os, const std::vector<BenchRecord>& records, bool header = true);
void write_json(std::ostream& os, const std::vector<BenchRecord>& records);

struct BandwidthResult {
  double bytes_per_second = 0.0;
  std::uint64_t bytes_moved = 0;  // per repetition: read + write of index and value arrays
  double best_seconds = 0.0;
  std::vector<double> rep_seconds;
};

/// Copies an index array and a value array of `bytes` total size into fresh
/// output arrays, reps times; the best repetition sets the rate.
BandwidthResult measure_bandwidth(std::uint64_t bytes, std::size_t reps, int threads = 1);

struct StreamSpec {
  std::uint64_t size = 1 << 20;
  std::uint64_t length = 1 << 20;  // indices in [0, length)
  std::uint64_t seed = 1;
};

/// Order-independent hash of a multiset of (column, value) pairs.
std::uint64_t multiset_hash(std::span<const Index> cols, std::span<const Real> vals);

/// Times histogram, prefix sum, reorder, dense accumulation, sort
/// accumulation and a streaming copy over one generated stream split into
/// n_chunks chunks, plus a Total record (histogram + prefix + reorder +
/// dense). Every stage checks its output; check_ok is false on a mismatch.
/// Values are 1.0 so accumulated sums equal spec.size exactly.
std::vector<BenchRecord> microbench_building_blocks(const StreamSpec& spec, std::uint64_t n_chunks,
                                                    std::size_t reps = 1);

struct SpgemmBenchConfig {
  Algorithm algo = Algorithm::Magnus;
  std::size_t reps = 10;  // timed runs after one warm-up
  MagnusOptions options;
  std::optional<double> bandwidth;  // bytes/s, enables the ideal-bound ratio
};

struct PhaseStats {
  double mean = 0.0;
  double min = 0.0;
  double stddev = 0.0;
};

struct SpgemmBenchSummary {
  SpgemmResult last;  // result of the final timed run
  std::map<std::string, PhaseStats> phases;  // per phase, plus "total"
  std::optional<IdealBound> bound;
  std::optional<double> bound_ratio;  // mean total / ideal seconds
  std::vector<BenchRecord> records;   // one per timed run
};

/// One warm-up plus config.reps timed runs. reps == 0 is an InputError.
SpgemmBenchSummary benchmark_spgemm(const CsrMatrix& a, const CsrMatrix& b, const SpgemmBenchConfig& config);

}  // namespace magnus
