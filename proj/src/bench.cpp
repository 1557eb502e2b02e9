#include "magnus/bench.hpp"

#include <algorithm>
#include <bit>
#include <cmath>
#include <cstring>
#include <numeric>
#include <ostream>

#include <json.hpp>

#include "magnus/errors.hpp"
#include "magnus/random.hpp"
#include "parallel.hpp"
#include "timer.hpp"

namespace magnus {

IdealBound ideal_bound(const IdealBoundInputs& in) {
  if (!(in.bandwidth_bytes_per_sec > 0.0)) throw InputError("bandwidth must be positive");
  IdealBound r;
  r.read_bytes = 2 * (in.n_a + 1) * in.s_row_ptr + in.nnz_a * (4 * in.s_row_ptr + 2 * in.s_col_idx + in.s_val) +
                 in.n_inter_prod * (2 * in.s_col_idx + in.s_val);
  r.write_bytes = (in.n_c + 1) * in.s_row_ptr + in.nnz_c * (in.s_col_idx + in.s_val);
  r.seconds = static_cast<double>(r.read_bytes + r.write_bytes) / in.bandwidth_bytes_per_sec;
  return r;
}

IdealBoundInputs ideal_bound_inputs(const CsrMatrix& a, const SpgemmResult& result, double bandwidth) {
  IdealBoundInputs in;
  in.n_a = a.n_rows;
  in.nnz_a = a.nnz();
  const auto it = result.counters.find("inter_prod_size");
  in.n_inter_prod = it != result.counters.end() ? it->second : 0;
  in.n_c = result.c.n_rows;
  in.nnz_c = result.c.nnz();
  in.s_row_ptr = sizeof(Offset);
  in.s_col_idx = result.c.col_index_bytes();
  in.s_val = sizeof(Real);
  in.bandwidth_bytes_per_sec = bandwidth;
  return in;
}

namespace {

std::string join_params(const BenchRecord& r) {
  std::string s;
  for (const auto& [k, v] : r.params) {
    if (!s.empty()) s += ';';
    s += k + '=' + v;
  }
  return s;
}

}  // namespace

void write_csv(std::ostream& os, const std::vector<BenchRecord>& records, bool header) {
  if (header) os << "benchmark,params,repetition,seconds,rate,unit,check\n";
  for (const auto& r : records) {
    os << r.benchmark << ',' << join_params(r) << ',' << r.repetition << ',' << r.seconds << ',' << r.rate << ','
       << r.unit << ',' << (r.check_ok ? "ok" : "FAIL") << '\n';
  }
}

void write_json(std::ostream& os, const std::vector<BenchRecord>& records) {
  nlohmann::json out = nlohmann::json::array();
  for (const auto& r : records) {
    nlohmann::json params = nlohmann::json::object();
    for (const auto& [k, v] : r.params) params[k] = v;
    out.push_back({{"benchmark", r.benchmark},
                   {"params", params},
                   {"repetition", r.repetition},
                   {"seconds", r.seconds},
                   {"rate", r.rate},
                   {"unit", r.unit},
                   {"check", r.check_ok}});
  }
  os << out.dump(2) << '\n';
}

BandwidthResult measure_bandwidth(std::uint64_t bytes, std::size_t reps, int threads) {
  if (reps == 0) throw InputError("bandwidth needs at least one repetition");
  const std::size_t n = bytes / (sizeof(Index) + sizeof(Real));
  if (n == 0) throw InputError("bandwidth buffer too small");
  std::vector<Index> in_cols(n), out_cols(n);
  std::vector<Real> in_vals(n), out_vals(n);
  for (std::size_t i = 0; i < n; ++i) {
    in_cols[i] = i;
    in_vals[i] = 1.0;
    out_cols[i] = 0;
    out_vals[i] = 0.0;
  }
  BandwidthResult r;
  r.bytes_moved = 2 * n * (sizeof(Index) + sizeof(Real));
  r.best_seconds = 0.0;
  const auto signed_n = static_cast<std::int64_t>(n);
  for (std::size_t rep = 0; rep < reps; ++rep) {
    detail::Stopwatch sw;
#pragma omp parallel for schedule(static) num_threads(detail::worker_count(threads))
    for (std::int64_t i = 0; i < signed_n; ++i) {
      out_cols[i] = in_cols[i];
      out_vals[i] = in_vals[i];
    }
    const double t = std::max(sw.seconds(), 1e-9);
    r.rep_seconds.push_back(t);
    if (rep == 0 || t < r.best_seconds) r.best_seconds = t;
    in_cols.swap(out_cols);
    in_vals.swap(out_vals);
  }
  r.bytes_per_second = static_cast<double>(r.bytes_moved) / r.best_seconds;
  return r;
}

std::uint64_t multiset_hash(std::span<const Index> cols, std::span<const Real> vals) {
  std::uint64_t h = 0;
  for (std::size_t i = 0; i < cols.size(); ++i) {
    const std::uint64_t v = vals.empty() ? 0 : std::bit_cast<std::uint64_t>(vals[i]);
    h += SplitMix64::mix(SplitMix64::mix(cols[i]) ^ v);
  }
  return h;
}

std::vector<BenchRecord> microbench_building_blocks(const StreamSpec& spec, std::uint64_t n_chunks,
                                                    std::size_t reps) {
  if (spec.length == 0) throw InputError("stream length must be at least 1");
  if (reps == 0) throw InputError("microbench needs at least one repetition");
  if (n_chunks == 0 || !std::has_single_bit(n_chunks) || n_chunks > ceil_pow2(spec.length)) {
    throw InputError("n_chunks must be a power of two no larger than the stream length");
  }
  const std::size_t n = spec.size;
  const Index padded = ceil_pow2(spec.length);
  const Index chunk_len = padded / n_chunks;
  const unsigned shift = log2_pow2(chunk_len);
  const Index mask = chunk_len - 1;

  std::vector<Index> cols(n);
  std::vector<Real> vals(n, 1.0);
  SplitMix64 rng(spec.seed);
  for (auto& c : cols) c = rng.below(spec.length);
  const std::uint64_t input_hash = multiset_hash(cols, vals);

  std::vector<Offset> counts(n_chunks);
  std::vector<Offset> offsets(n_chunks + 1);
  std::vector<Offset> cursor(n_chunks);
  std::vector<Index> local(n);
  std::vector<Real> local_vals(n);
  std::vector<Index> copy_cols(n);
  std::vector<Real> copy_vals(n);
  std::vector<Index> out_cols;
  std::vector<Real> out_vals;
  DenseAccumulator dense(chunk_len);
  dense.enable_values();
  SortAccumulator sort;

  const std::vector<std::pair<std::string, std::string>> params = {
      {"size", std::to_string(spec.size)},
      {"length", std::to_string(spec.length)},
      {"n_chunks", std::to_string(n_chunks)},
      {"seed", std::to_string(spec.seed)}};
  std::vector<BenchRecord> records;
  auto record = [&](const char* name, double t, std::size_t rep, bool ok) {
    t = std::max(t, 1e-9);
    records.push_back({name, params, t, static_cast<double>(n) / t, "elements/s", rep, ok});
  };

  for (std::size_t rep = 0; rep < reps; ++rep) {
    detail::Stopwatch sw;
    std::fill(counts.begin(), counts.end(), 0);
    for (Index c : cols) ++counts[c >> shift];
    const double t_histo = sw.lap();
    const bool histo_ok = std::accumulate(counts.begin(), counts.end(), Offset{0}) == n;

    sw.lap();
    offsets[0] = 0;
    std::inclusive_scan(counts.begin(), counts.end(), offsets.begin() + 1);
    const double t_prefix = sw.lap();
    const bool prefix_ok = offsets[n_chunks] == n;

    sw.lap();
    std::copy(offsets.begin(), offsets.end() - 1, cursor.begin());
    for (std::size_t i = 0; i < n; ++i) {
      const Index c = cols[i];
      const Offset pos = cursor[c >> shift]++;
      local[pos] = c & mask;
      local_vals[pos] = vals[i];
    }
    const double t_reorder = sw.lap();
    std::uint64_t reorder_hash = 0;
    for (Index k = 0; k < n_chunks; ++k) {
      for (Offset p = offsets[k]; p < offsets[k + 1]; ++p) {
        const Index g = (k << shift) | local[p];
        reorder_hash += SplitMix64::mix(SplitMix64::mix(g) ^ std::bit_cast<std::uint64_t>(local_vals[p]));
      }
    }
    const bool reorder_ok = reorder_hash == input_hash;

    out_cols.resize(std::max<std::size_t>(chunk_len, 1));
    out_vals.resize(out_cols.size());
    double dense_sum = 0.0;
    sw.lap();
    for (Index k = 0; k < n_chunks; ++k) {
      for (Offset p = offsets[k]; p < offsets[k + 1]; ++p) dense.add(local[p], local_vals[p]);
      const std::size_t m = dense.drain(k << shift, out_cols.data(), out_vals.data());
      for (std::size_t q = 0; q < m; ++q) dense_sum += out_vals[q];
    }
    const double t_dense = sw.lap();
    const bool dense_ok = dense_sum == static_cast<double>(n);

    double sort_sum = 0.0;
    std::size_t max_chunk = 0;
    for (Offset c : counts) max_chunk = std::max<std::size_t>(max_chunk, c);
    if (out_cols.size() < max_chunk) {
      out_cols.resize(max_chunk);
      out_vals.resize(max_chunk);
    }
    sw.lap();
    for (Index k = 0; k < n_chunks; ++k) {
      const std::size_t len = offsets[k + 1] - offsets[k];
      const std::size_t m = sort.accumulate(std::span<const Index>(local.data() + offsets[k], len),
                                            std::span<const Real>(local_vals.data() + offsets[k], len),
                                            out_cols.data(), out_vals.data());
      for (std::size_t q = 0; q < m; ++q) sort_sum += out_vals[q];
    }
    const double t_sort = sw.lap();
    const bool sort_ok = sort_sum == static_cast<double>(n);

    sw.lap();
    std::memcpy(copy_cols.data(), cols.data(), n * sizeof(Index));
    std::memcpy(copy_vals.data(), vals.data(), n * sizeof(Real));
    const double t_stream = sw.lap();
    const bool stream_ok = copy_cols == cols;

    record("histogram", t_histo, rep, histo_ok);
    record("prefix_sum", t_prefix, rep, prefix_ok);
    record("reorder", t_reorder, rep, reorder_ok);
    record("dense_accumulate", t_dense, rep, dense_ok);
    record("sort_accumulate", t_sort, rep, sort_ok);
    record("stream", t_stream, rep, stream_ok);
    record("total", t_histo + t_prefix + t_reorder + t_dense, rep, histo_ok && prefix_ok && reorder_ok && dense_ok);
  }
  return records;
}

namespace {

PhaseStats stats_of(const std::vector<double>& xs) {
  PhaseStats s;
  if (xs.empty()) return s;
  s.mean = std::accumulate(xs.begin(), xs.end(), 0.0) / static_cast<double>(xs.size());
  s.min = *std::min_element(xs.begin(), xs.end());
  double var = 0.0;
  for (double x : xs) var += (x - s.mean) * (x - s.mean);
  s.stddev = std::sqrt(var / static_cast<double>(xs.size()));
  return s;
}

}  // namespace

SpgemmBenchSummary benchmark_spgemm(const CsrMatrix& a, const CsrMatrix& b, const SpgemmBenchConfig& config) {
  if (config.reps == 0) throw InputError("repetitions must be at least 1");
  SpgemmBenchSummary summary;
  run_spgemm(config.algo, a, b, config.options);  // warm-up

  std::map<std::string, std::vector<double>> samples;
  for (std::size_t rep = 0; rep < config.reps; ++rep) {
    summary.last = run_spgemm(config.algo, a, b, config.options);
    const auto& r = summary.last;
    for (const auto& [phase, t] : r.phase_seconds) samples[phase].push_back(t);
    const double total = r.total_seconds();
    samples["total"].push_back(total);
    BenchRecord rec;
    rec.benchmark = "spgemm";
    rec.params = {{"algo", std::string(algorithm_name(config.algo))},
                  {"threads", std::to_string(detail::worker_count(config.options.threads))},
                  {"nnz_c", std::to_string(r.c.nnz())},
                  {"inter_prod_size", std::to_string(r.counters.at("inter_prod_size"))}};
    for (const char* key : {"rows_sort", "rows_dense", "rows_fine", "rows_coarse"}) {
      if (auto it = r.counters.find(key); it != r.counters.end()) rec.params.emplace_back(key, std::to_string(it->second));
    }
    rec.seconds = std::max(total, 1e-9);
    rec.rate = static_cast<double>(r.counters.at("inter_prod_size")) / rec.seconds;
    rec.unit = "interprod/s";
    rec.repetition = rep;
    summary.records.push_back(std::move(rec));
  }
  for (const auto& [phase, xs] : samples) summary.phases[phase] = stats_of(xs);
  if (config.bandwidth) {
    summary.bound = ideal_bound(ideal_bound_inputs(a, summary.last, *config.bandwidth));
    summary.bound_ratio = summary.phases["total"].mean / summary.bound->seconds;
  }
  return summary;
}

}  // namespace magnus
