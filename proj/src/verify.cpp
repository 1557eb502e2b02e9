#include "magnus/verify.hpp"

#include <algorithm>
#include <cmath>
#include <exception>

#include "magnus/errors.hpp"
#include "magnus/generators.hpp"
#include "magnus/random.hpp"
#include "timer.hpp"

namespace magnus {
namespace {

constexpr double kRealTolerance = 1e-5;
constexpr std::uint64_t kKiB = 1024;

CsrMatrix random_matrix(Index rows, Index cols, double density, bool integer, SplitMix64& rng) {
  std::vector<Triplet> t;
  for (Index i = 0; i < rows; ++i) {
    for (Index j = 0; j < cols; ++j) {
      if (rng.uniform01() < density) {
        const Real v = integer ? static_cast<Real>(1 + rng.below(4)) : rng.uniform_open_closed();
        t.push_back({i, j, v});
      }
    }
  }
  return csr_from_triplets(t, rows, cols);
}

SystemParams toy_system(std::uint64_t l2, std::uint64_t line, std::uint64_t budget) {
  SystemParams s;
  s.l2_bytes = l2;
  s.cache_line_bytes = line;
  s.memory_budget_bytes = budget;
  return s;
}

// B rows [0, k/2) are narrow (columns in [0, narrow)), the rest span all
// n_cols columns. A row i references one B row (i % 3 == 0), several narrow
// rows (i % 3 == 1) or several wide rows (i % 3 == 2).
std::pair<CsrMatrix, CsrMatrix> mixed_width_pair(Index rows, Index k, Index n_cols, Index narrow, Index per_b_row,
                                                 Index per_a_row, std::uint64_t seed) {
  std::vector<Triplet> tb;
  for (Index j = 0; j < k; ++j) {
    auto rng = SplitMix64::substream(seed, j);
    const Index width = j < k / 2 ? narrow : n_cols;
    for (Index e = 0; e < per_b_row; ++e) tb.push_back({j, rng.below(width), static_cast<Real>(1 + rng.below(3))});
  }
  std::vector<Triplet> ta;
  for (Index i = 0; i < rows; ++i) {
    auto rng = SplitMix64::substream(seed ^ 0xa5a5a5a5ULL, i);
    if (i % 3 == 0) {
      ta.push_back({i, rng.below(k), 1.0});
      continue;
    }
    const Index base = i % 3 == 1 ? 0 : k / 2;
    for (Index e = 0; e < per_a_row; ++e) ta.push_back({i, base + rng.below(k / 2), static_cast<Real>(1 + rng.below(3))});
  }
  return {csr_from_triplets(ta, rows, k), csr_from_triplets(tb, k, n_cols)};
}

}  // namespace

bool VerifyReport::passed() const { return failures() == 0 && !outcomes.empty(); }

std::size_t VerifyReport::failures() const {
  return static_cast<std::size_t>(std::count_if(outcomes.begin(), outcomes.end(), [](const auto& o) { return !o.passed; }));
}

std::string compare_to_oracle(const CsrMatrix& got, const CsrMatrix& oracle, bool integer_values) {
  if (got.n_rows != oracle.n_rows || got.n_cols != oracle.n_cols) return "shape differs";
  if (got.row_ptr != oracle.row_ptr) {
    for (Index i = 0; i < oracle.n_rows; ++i) {
      if (got.row_ptr.size() <= i + 1 || got.row_nnz(i) != oracle.row_nnz(i)) {
        return "row " + std::to_string(i) + " nnz differs";
      }
    }
    return "row pointer differs";
  }
  if (got.col != oracle.col) return "column indices differ";
  for (std::size_t k = 0; k < oracle.val.size(); ++k) {
    const Real x = got.val[k];
    const Real y = oracle.val[k];
    const bool ok = integer_values ? x == y : std::abs(x - y) <= kRealTolerance * std::max(std::abs(y), 1e-300);
    if (!ok) return "value " + std::to_string(k) + " differs: " + std::to_string(x) + " vs " + std::to_string(y);
  }
  return {};
}

std::vector<VerifyCase> random_cases(std::size_t n, std::uint64_t seed) {
  static constexpr double kDensities[] = {0.0, 0.01, 0.05, 0.1, 0.3, 0.6, 1.0};
  std::vector<VerifyCase> out;
  for (std::size_t c = 0; c < n; ++c) {
    auto rng = SplitMix64::substream(seed, c);
    const Index rows = 1 + rng.below(128);
    const Index inner = c % 5 == 0 ? rows : 1 + rng.below(128);
    const Index cols = c % 5 == 0 ? rows : 1 + rng.below(128);
    const double da = kDensities[rng.below(std::size(kDensities))];
    const double db = kDensities[rng.below(std::size(kDensities))];
    VerifyCase vc;
    vc.integer_values = c % 4 != 3;
    vc.a = random_matrix(rows, inner, da, vc.integer_values, rng);
    vc.b = random_matrix(inner, cols, db, vc.integer_values, rng);
    vc.name = "random-" + std::to_string(c) + "-" + std::to_string(rows) + "x" + std::to_string(inner) + "x" +
              std::to_string(cols) + (vc.integer_values ? "" : "-real");
    if (c % 3 == 0) {
      // l2 of 128 B: dense windows up to 14 columns, coarse above 64 columns
      vc.system = toy_system(128, 16, 1 << 20);
      vc.thresholds = {16, 4};
      vc.name += "-micro";
    } else {
      vc.system = SystemParams{};
    }
    out.push_back(std::move(vc));
  }
  return out;
}

std::vector<VerifyCase> fixed_cases(std::uint64_t seed) {
  std::vector<VerifyCase> out;
  auto add = [&](std::string name, CsrMatrix a, CsrMatrix b) {
    VerifyCase vc;
    vc.name = std::move(name);
    vc.a = std::move(a);
    vc.b = std::move(b);
    vc.system = SystemParams{};
    out.push_back(vc);
    vc.name += "-micro";
    vc.system = toy_system(128, 16, 1 << 20);
    vc.thresholds = {16, 4};
    out.push_back(std::move(vc));
  };
  add("identity-16", identity(16), identity(16));
  add("zero", CsrMatrix(8, 8), identity(8));
  {
    // Two complete bipartite blocks and their square: every row of C fills.
    std::vector<Triplet> t;
    for (Index i = 0; i < 40; ++i) {
      const Index lo = i < 20 ? 20 : 0;
      for (Index j = lo; j < lo + 20; ++j) t.push_back({i, j, 1.0});
    }
    const CsrMatrix k = csr_from_triplets(t, 40, 40);
    add("bipartite-k20-20", k, k);
  }
  {
    // Mycielski-style fill: a dense block glued to a sparse ring.
    std::vector<Triplet> t;
    const Index n = 96;
    for (Index i = 0; i < n; ++i) {
      t.push_back({i, (i + 1) % n, 1.0});
      t.push_back({(i + 1) % n, i, 1.0});
    }
    for (Index i = 0; i < 24; ++i) {
      for (Index j = 48; j < 96; ++j) {
        t.push_back({i, j, 1.0});
        t.push_back({j, i, 1.0});
      }
    }
    const CsrMatrix m = csr_from_triplets(t, n, n);
    CsrMatrix ones = m;
    std::fill(ones.val.begin(), ones.val.end(), 1.0);
    add("high-fill-96", ones, ones);
  }
  const CsrMatrix banded = gen_banded({100, 3, seed, false});
  add("banded-100-3", banded, banded);
  const CsrMatrix rmat = gen_rmat({7, 8, 0.57, 0.19, 0.19, seed, false});
  add("rmat-7-8", rmat, rmat);
  const CsrMatrix er = gen_uniform_random({128, 128, 8, seed, false});
  add("er-128-8", er, er);
  return out;
}

std::vector<VerifyCase> toy_sweep_cases(std::uint64_t seed) {
  std::vector<VerifyCase> out;
  struct Shape {
    const char* name;
    std::uint64_t l2;
    std::uint64_t budget;
    Index n_cols;
    Index narrow;
  };
  // 4 KiB: coarse above 2^14 columns, dense windows up to 455 columns.
  // 64 KiB and 1 MiB cannot reach their coarse threshold below the oracle's
  // column limit, so they cover Sort, Dense and FineLevel.
  static constexpr Shape kShapes[] = {
      {"l2-4k-coarse", 4 * kKiB, 1ULL << 30, Index{1} << 16, 256},
      {"l2-4k-coarse-batched", 4 * kKiB, 3 * 512 * kCoarseElementBytes, Index{1} << 16, 256},
      {"l2-4k-coarse-budget-1row", 4 * kKiB, 512 * kCoarseElementBytes, Index{1} << 17, 256},
      {"l2-4k-fine", 4 * kKiB, 1ULL << 30, Index{1} << 13, 256},
      {"l2-64k-fine", 64 * kKiB, 1ULL << 30, Index{1} << 17, 4096},
      {"l2-1m-fine", 1024 * kKiB, 1ULL << 30, Index{1} << 18, 8192},
  };
  for (const auto& s : kShapes) {
    auto [a, b] = mixed_width_pair(48, 64, s.n_cols, s.narrow, 64, 8, seed);
    VerifyCase vc;
    vc.name = std::string("toy-") + s.name;
    vc.a = std::move(a);
    vc.b = std::move(b);
    vc.system = toy_system(s.l2, 64, s.budget);
    out.push_back(std::move(vc));
  }
  return out;
}

VerifyReport run_verify(const VerifyConfig& config) {
  std::vector<VerifyCase> corpus = random_cases(config.n_random, config.seed);
  if (config.fixed) {
    auto f = fixed_cases(config.seed);
    std::move(f.begin(), f.end(), std::back_inserter(corpus));
  }
  if (config.toy_sweep) {
    auto t = toy_sweep_cases(config.seed);
    std::move(t.begin(), t.end(), std::back_inserter(corpus));
  }
  if (!config.filter.empty()) {
    std::erase_if(corpus, [&](const VerifyCase& c) { return c.name.find(config.filter) == std::string::npos; });
  }
  if (corpus.empty()) throw InputError("verification corpus selection is empty");

  VerifyReport report;
  report.n_cases = corpus.size();
  for (const auto& vc : corpus) {
    const CsrMatrix oracle = spgemm_reference(vc.a, vc.b);
    for (Algorithm algo : {Algorithm::GustavsonDense, Algorithm::Esc, Algorithm::Magnus, Algorithm::MagnusFineOnly}) {
      VerifyOutcome o;
      o.case_name = vc.name;
      o.algo = algo;
      detail::Stopwatch sw;
      try {
        MagnusOptions opt;
        opt.system = vc.system;
        opt.thresholds = vc.thresholds;
        opt.threads = config.threads;
        SpgemmResult r = run_spgemm(algo, vc.a, vc.b, opt);
        if (algo == Algorithm::Magnus) {
          for (const char* key : {"rows_sort", "rows_dense", "rows_fine", "rows_coarse", "coarse_batches"}) {
            report.magnus_counters[key] += r.counters[key];
          }
          if (!config.inject_fault.empty() && vc.name.find(config.inject_fault) != std::string::npos) {
            if (r.c.nnz() > 0) {
              r.c.val[0] += 1.0;
            } else {
              r.c.col.push_back(0);
              r.c.val.push_back(1.0);
              std::fill(r.c.row_ptr.begin() + 1, r.c.row_ptr.end(), 1);
            }
          }
        }
        o.message = compare_to_oracle(r.c, oracle, vc.integer_values);
        o.passed = o.message.empty();
      } catch (const std::exception& e) {
        o.message = std::string("exception: ") + e.what();
      }
      o.seconds = sw.seconds();
      report.outcomes.push_back(std::move(o));
    }
  }
  return report;
}

}  // namespace magnus
