// magnus: matrix generation, SpGEMM runs, microbenchmarks, bounds, verification.

#include <cstdio>
#include <fstream>
#include <iomanip>
#include <iostream>
#include <optional>
#include <sstream>
#include <string>
#include <vector>

#include <CLI11.hpp>

#include "magnus/bench.hpp"
#include "magnus/errors.hpp"
#include "magnus/generators.hpp"
#include "magnus/io.hpp"
#include "magnus/spgemm.hpp"
#include "magnus/system.hpp"
#include "magnus/verify.hpp"

using namespace magnus;

namespace {

constexpr int kExitOk = 0;
constexpr int kExitVerifyFailed = 1;
constexpr int kExitUsage = 2;

struct Common {
  int threads = 0;
  std::uint64_t seed = 1;
  std::optional<std::uint64_t> l2_bytes;
  std::optional<std::uint64_t> cache_line;
  std::optional<std::uint64_t> mem_budget;
  std::string csv;
  bool json = false;

  // Detected host parameters with flag overrides applied.
  SystemParams system(std::vector<std::string>& warnings) const {
    auto d = detect_system();
    warnings = d.warnings;
    if (l2_bytes) d.params.l2_bytes = *l2_bytes;
    if (cache_line) d.params.cache_line_bytes = *cache_line;
    if (mem_budget) d.params.memory_budget_bytes = *mem_budget;
    d.params.validate();
    return d.params;
  }

  // Human-readable text moves to stderr when records own stdout.
  std::ostream& out() const { return (csv == "-" || json) ? std::cerr : std::cout; }

  void emit(const std::vector<BenchRecord>& records) const {
    if (!csv.empty()) {
      if (csv == "-") {
        write_csv(std::cout, records);
      } else {
        std::ofstream out(csv);
        if (!out) throw InputError("cannot write " + csv);
        write_csv(out, records);
      }
    }
    if (json) write_json(std::cout, records);
  }
};

void add_common(CLI::App* app, Common& c) {
  app->add_option("--threads", c.threads, "worker threads (0: OpenMP default)")->envname("MAGNUS_THREADS");
  app->add_option("--seed", c.seed, "generator seed")->envname("MAGNUS_SEED");
  app->add_option("--l2-bytes", c.l2_bytes, "L2 size override")->envname("MAGNUS_L2_BYTES");
  app->add_option("--cache-line", c.cache_line, "cache line override")->envname("MAGNUS_CACHE_LINE");
  app->add_option("--mem-budget", c.mem_budget, "coarse batch memory budget")->envname("MAGNUS_MEM_BUDGET");
  app->add_option("--csv", c.csv, "write CSV records to a path ('-' for stdout)")->envname("MAGNUS_CSV");
  app->add_flag("--json", c.json, "print JSON records to stdout")->envname("MAGNUS_JSON");
}

struct GenArgs {
  std::string kind;
  std::string output;
  std::string format;
  unsigned scale = 10;
  Index edge_factor = 16;
  Index rows = 1024;
  Index cols = 1024;
  Index per_row = 16;
  Index n = 1024;
  Index half_width = 2;
  bool random_values = false;
};

int run_gen(const GenArgs& g, const Common& c) {
  CsrMatrix m;
  if (g.kind == "rmat") {
    m = gen_rmat({g.scale, g.edge_factor, 0.57, 0.19, 0.19, c.seed, g.random_values}, c.threads);
  } else if (g.kind == "er") {
    m = gen_uniform_random({g.rows, g.cols, g.per_row, c.seed, g.random_values}, c.threads);
  } else {
    m = gen_banded({g.n, g.half_width, c.seed, g.random_values});
  }
  const bool binary = g.format == "bin" || (g.format.empty() && g.output.ends_with(".bin"));
  if (binary) {
    write_binary(m, g.output);
  } else {
    write_matrix_market(m, g.output);
  }
  c.out() << g.kind << ": " << m.n_rows << " x " << m.n_cols << ", nnz " << m.nnz() << " -> " << g.output << '\n';
  return kExitOk;
}

struct SpgemmArgs {
  std::string a_path;
  std::string b_path;
  std::optional<unsigned> rmat_scale;
  Index rmat_edge_factor = 16;
  bool er = false;
  ErProductParams er_params;
  std::vector<std::string> algos{"magnus"};
  std::size_t reps = 10;
  bool force_fine_only = false;
  std::optional<double> bandwidth;
  bool measure_bw = false;
  bool check = false;
};

std::string fmt(double x, int prec = 6) {
  std::ostringstream os;
  os << std::setprecision(prec) << x;
  return os.str();
}

int run_spgemm_cmd(const SpgemmArgs& s, const Common& c) {
  CsrMatrix a;
  CsrMatrix b;
  std::string source;
  if (!s.a_path.empty()) {
    a = read_matrix(s.a_path);
    b = s.b_path.empty() ? a : read_matrix(s.b_path);
    source = s.a_path;
  } else if (s.rmat_scale) {
    a = gen_rmat({*s.rmat_scale, s.rmat_edge_factor, 0.57, 0.19, 0.19, c.seed, false}, c.threads);
    b = a;
    source = "rmat-" + std::to_string(*s.rmat_scale);
  } else if (s.er) {
    auto p = s.er_params;
    p.seed = c.seed;
    auto pair = gen_er_product(p, c.threads);
    a = std::move(pair.a);
    b = std::move(pair.b);
    source = "er-" + std::to_string(p.rows_c) + "x" + std::to_string(p.cols_c);
  } else {
    throw InputError("spgemm needs --a, --rmat or --er");
  }
  if (s.reps == 0) throw InputError("--reps must be at least 1");

  std::vector<std::string> warnings;
  MagnusOptions opt;
  opt.system = c.system(warnings);
  opt.threads = c.threads;
  opt.force_fine_only = s.force_fine_only;
  for (const auto& w : warnings) std::cerr << "warning: " << w << '\n';

  std::optional<double> bw = s.bandwidth;
  if (!bw && s.measure_bw) bw = measure_bandwidth(std::uint64_t{1} << 28, 5, c.threads).bytes_per_second;

  std::vector<Algorithm> algos;
  for (const auto& name : s.algos) {
    if (name == "all") {
      algos.assign(kAllAlgorithms.begin(), kAllAlgorithms.end());
    } else {
      algos.push_back(parse_algorithm(name));
    }
  }

  std::optional<CsrMatrix> oracle;
  if (s.check) oracle = spgemm_reference(a, b);

  c.out() << source << ": A " << a.n_rows << " x " << a.n_cols << " nnz " << a.nnz() << ", B " << b.n_rows << " x "
          << b.n_cols << " nnz " << b.nnz() << '\n';
  std::vector<BenchRecord> records;
  bool all_ok = true;
  for (Algorithm algo : algos) {
    SpgemmBenchConfig cfg;
    cfg.algo = algo;
    cfg.reps = s.reps;
    cfg.options = opt;
    cfg.bandwidth = bw;
    auto sum = benchmark_spgemm(a, b, cfg);
    const auto& r = sum.last;
    c.out() << algorithm_name(algo) << ": total " << fmt(sum.phases["total"].mean) << " s (min "
            << fmt(sum.phases["total"].min) << ", std " << fmt(sum.phases["total"].stddev) << ")";
    for (const char* phase : {"setup", "symbolic", "numeric", "canonicalize"}) {
      if (auto it = sum.phases.find(phase); it != sum.phases.end()) c.out() << ", " << phase << " " << fmt(it->second.mean);
    }
    c.out() << "\n  nnz_c " << r.c.nnz() << ", inter_prod " << r.counters.at("inter_prod_size");
    for (const char* key : {"rows_sort", "rows_dense", "rows_fine", "rows_coarse", "coarse_batches"}) {
      if (auto it = r.counters.find(key); it != r.counters.end()) c.out() << ", " << key << " " << it->second;
    }
    c.out() << '\n';
    if (sum.bound) {
      c.out() << "  ideal " << fmt(sum.bound->seconds) << " s (read " << sum.bound->read_bytes << " B, write "
              << sum.bound->write_bytes << " B), ratio " << fmt(*sum.bound_ratio, 3) << '\n';
    }
    for (const auto& w : r.warnings) std::cerr << "warning: " << w << '\n';
    std::string verdict;
    if (oracle) {
      const std::string msg = compare_to_oracle(r.c, *oracle, false);
      verdict = msg.empty() ? "PASS" : "FAIL";
      all_ok = all_ok && msg.empty();
      c.out() << "  verification " << verdict << (msg.empty() ? "" : ": " + msg) << '\n';
    }
    for (auto& rec : sum.records) {
      if (sum.bound_ratio) rec.params.emplace_back("ideal_ratio", fmt(*sum.bound_ratio, 4));
      if (!verdict.empty()) {
        rec.params.emplace_back("verification", verdict);
        rec.check_ok = verdict == "PASS";
      }
      records.push_back(std::move(rec));
    }
  }
  c.emit(records);
  return all_ok ? kExitOk : kExitVerifyFailed;
}

struct MicroArgs {
  std::uint64_t size = 1 << 22;
  std::uint64_t length = 1 << 22;
  std::vector<std::uint64_t> chunks;
  unsigned sweep_lo = 0;
  unsigned sweep_hi = 12;
  std::size_t reps = 1;
};

int run_micro(const MicroArgs& m, const Common& c) {
  std::vector<std::uint64_t> chunks = m.chunks;
  if (chunks.empty()) {
    for (unsigned e = m.sweep_lo; e <= m.sweep_hi; ++e) chunks.push_back(std::uint64_t{1} << e);
  }
  std::vector<BenchRecord> all;
  bool ok = true;
  c.out() << std::left << std::setw(10) << "n_chunks" << std::setw(18) << "stage" << std::setw(14) << "seconds"
          << "Melem/s\n";
  for (auto nc : chunks) {
    auto recs = microbench_building_blocks({m.size, m.length, c.seed}, nc, m.reps);
    for (const auto& r : recs) {
      ok = ok && r.check_ok;
      c.out() << std::setw(10) << nc << std::setw(18) << r.benchmark << std::setw(14) << fmt(r.seconds, 4)
              << fmt(r.rate / 1e6, 4) << (r.check_ok ? "" : "  CHECK FAILED") << '\n';
    }
    all.insert(all.end(), recs.begin(), recs.end());
  }
  c.emit(all);
  return ok ? kExitOk : kExitVerifyFailed;
}

int run_bound(const IdealBoundInputs& in, const Common& c) {
  const auto r = ideal_bound(in);
  c.out() << "read_bytes " << r.read_bytes << "\nwrite_bytes " << r.write_bytes << "\nseconds " << fmt(r.seconds, 9)
          << '\n';
  BenchRecord rec{"ideal_bound",
                  {{"read_bytes", std::to_string(r.read_bytes)}, {"write_bytes", std::to_string(r.write_bytes)}},
                  r.seconds,
                  in.bandwidth_bytes_per_sec,
                  "bytes/s",
                  0,
                  true};
  c.emit({rec});
  return kExitOk;
}

int run_bandwidth(std::uint64_t bytes, std::size_t reps, const Common& c) {
  const auto r = measure_bandwidth(bytes, reps, c.threads > 0 ? c.threads : 1);
  c.out() << "bytes_moved " << r.bytes_moved << "\nbest_seconds " << fmt(r.best_seconds) << "\nbandwidth "
          << fmt(r.bytes_per_second / 1e9, 4) << " GB/s\n";
  std::vector<BenchRecord> recs;
  for (std::size_t i = 0; i < r.rep_seconds.size(); ++i) {
    recs.push_back({"bandwidth",
                    {{"bytes", std::to_string(bytes)}},
                    r.rep_seconds[i],
                    static_cast<double>(r.bytes_moved) / r.rep_seconds[i],
                    "bytes/s",
                    i,
                    true});
  }
  c.emit(recs);
  return kExitOk;
}

int run_verify_cmd(const VerifyConfig& cfg, bool quiet, const Common& c) {
  const auto report = run_verify(cfg);
  std::vector<BenchRecord> recs;
  for (const auto& o : report.outcomes) {
    if (!quiet || !o.passed) {
      c.out() << (o.passed ? "PASS " : "FAIL ") << std::left << std::setw(44) << o.case_name << std::setw(18)
              << algorithm_name(o.algo) << o.message << '\n';
    }
    recs.push_back({"verify",
                    {{"case", o.case_name}, {"algo", std::string(algorithm_name(o.algo))}},
                    std::max(o.seconds, 1e-9),
                    0.0,
                    "",
                    0,
                    o.passed});
  }
  c.out() << report.n_cases << " cases, " << report.outcomes.size() << " runs, " << report.failures()
          << " failures; magnus rows:";
  for (const auto& [k, v] : report.magnus_counters) c.out() << ' ' << k << '=' << v;
  c.out() << '\n' << (report.passed() ? "PASS" : "FAIL") << '\n';
  c.emit(recs);
  return report.passed() ? kExitOk : kExitVerifyFailed;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"MAGNUS SpGEMM driver"};
  app.require_subcommand(1);
  Common common;

  GenArgs gen;
  auto* g = app.add_subcommand("gen", "generate a matrix (rmat | er | banded)");
  g->add_option("kind", gen.kind)->required()->check(CLI::IsMember({"rmat", "er", "banded"}));
  g->add_option("-o,--output", gen.output, "output path (.mtx or .bin)")->required();
  g->add_option("--format", gen.format)->check(CLI::IsMember({"mtx", "bin"}));
  g->add_option("--scale", gen.scale, "rmat: rows = 2^scale");
  g->add_option("--edge-factor", gen.edge_factor, "rmat: nonzeros per row");
  g->add_option("--rows", gen.rows, "er: rows");
  g->add_option("--cols", gen.cols, "er: columns");
  g->add_option("--nnz-per-row", gen.per_row, "er: nonzeros per row");
  g->add_option("--n", gen.n, "banded: order");
  g->add_option("--half-width", gen.half_width, "banded: half bandwidth");
  g->add_flag("--random-values", gen.random_values, "values in (0, 1] instead of 1.0");
  add_common(g, common);

  SpgemmArgs sp;
  auto* s = app.add_subcommand("spgemm", "time SpGEMM algorithms");
  s->add_option("--a", sp.a_path, "left operand (.mtx or binary cache)");
  s->add_option("--b", sp.b_path, "right operand (default: A)");
  s->add_option("--rmat", sp.rmat_scale, "square an R-mat of this scale");
  s->add_option("--edge-factor", sp.rmat_edge_factor);
  s->add_flag("--er", sp.er, "uniform random product with lazily generated B");
  s->add_option("--er-rows", sp.er_params.rows_c);
  s->add_option("--er-cols", sp.er_params.cols_c);
  s->add_option("--er-a-nnz", sp.er_params.a_nnz_per_row);
  s->add_option("--er-b-nnz", sp.er_params.b_nnz_per_row);
  s->add_option("--algo", sp.algos, "reference, gustavson-dense, esc, magnus, magnus-fine-only or all")
      ->delimiter(',')
      ->envname("MAGNUS_ALGO");
  s->add_option("--reps", sp.reps, "timed runs after one warm-up")->envname("MAGNUS_REPS");
  s->add_flag("--force-fine-only", sp.force_fine_only)->envname("MAGNUS_FORCE_FINE_ONLY");
  s->add_option("--bandwidth", sp.bandwidth, "bytes/s for the ideal bound");
  s->add_flag("--measure-bandwidth", sp.measure_bw);
  s->add_flag("--check", sp.check, "compare with the reference product");
  add_common(s, common);

  MicroArgs mb;
  auto* m = app.add_subcommand("microbench", "building-block microbenchmarks");
  m->add_option("--size", mb.size, "stream elements");
  m->add_option("--length", mb.length, "index upper bound");
  m->add_option("--chunks", mb.chunks, "chunk counts (default: sweep)")->delimiter(',');
  m->add_option("--sweep-min", mb.sweep_lo, "log2 of the first chunk count");
  m->add_option("--sweep-max", mb.sweep_hi, "log2 of the last chunk count");
  m->add_option("--reps", mb.reps)->envname("MAGNUS_REPS");
  add_common(m, common);

  IdealBoundInputs bi;
  auto* bo = app.add_subcommand("bound", "ideal data-volume bound");
  bo->add_option("--n-a", bi.n_a)->required();
  bo->add_option("--nnz-a", bi.nnz_a)->required();
  bo->add_option("--inter-prod", bi.n_inter_prod)->required();
  bo->add_option("--n-c", bi.n_c)->required();
  bo->add_option("--nnz-c", bi.nnz_c)->required();
  bo->add_option("--s-row-ptr", bi.s_row_ptr);
  bo->add_option("--s-col-idx", bi.s_col_idx);
  bo->add_option("--s-val", bi.s_val);
  bo->add_option("--bandwidth", bi.bandwidth_bytes_per_sec, "bytes/s")->required();
  add_common(bo, common);

  std::uint64_t bw_bytes = std::uint64_t{1} << 28;
  std::size_t bw_reps = 5;
  auto* bw = app.add_subcommand("bandwidth", "streaming copy bandwidth");
  bw->add_option("--bytes", bw_bytes);
  bw->add_option("--reps", bw_reps)->envname("MAGNUS_REPS");
  add_common(bw, common);

  VerifyConfig vc;
  bool no_fixed = false;
  bool no_toy = false;
  bool quiet = false;
  auto* v = app.add_subcommand("verify", "oracle equivalence corpus");
  v->add_option("--random", vc.n_random, "randomized cases");
  v->add_flag("--no-fixed", no_fixed);
  v->add_flag("--no-toy", no_toy);
  v->add_option("--filter", vc.filter, "keep cases whose name contains this");
  v->add_option("--inject-fault", vc.inject_fault, "corrupt magnus output for matching cases")
      ->envname("MAGNUS_INJECT_FAULT");
  v->add_flag("-q,--quiet", quiet, "print failures only");
  add_common(v, common);

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int rc = app.exit(e);
    return rc == 0 ? kExitOk : kExitUsage;
  }

  try {
    if (g->parsed()) return run_gen(gen, common);
    if (s->parsed()) return run_spgemm_cmd(sp, common);
    if (m->parsed()) return run_micro(mb, common);
    if (bo->parsed()) return run_bound(bi, common);
    if (bw->parsed()) return run_bandwidth(bw_bytes, bw_reps, common);
    if (v->parsed()) {
      vc.seed = common.seed;
      vc.threads = common.threads;
      vc.fixed = !no_fixed;
      vc.toy_sweep = !no_toy;
      return run_verify_cmd(vc, quiet, common);
    }
  } catch (const InputError& e) {
    std::cerr << "error: " << e.what() << '\n';
    return kExitUsage;
  } catch (const magnus::ParseError& e) {
    std::cerr << "error: " << e.what() << '\n';
    return kExitUsage;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << '\n';
    return kExitVerifyFailed;
  }
  return kExitUsage;
}
