#include <doctest.h>

#include "helpers.hpp"
#include "magnus/coarse_level.hpp"
#include "magnus/errors.hpp"
#include "magnus/fine_level.hpp"
#include "magnus/generators.hpp"
#include "magnus/magnus.hpp"
#include "magnus/verify.hpp"

using namespace magnus;

namespace {

ChunkPlan manual_plan(Index n_fine, Index len_fine, Index n_coarse = 1) {
  ChunkPlan p;
  p.n_chunks_fine = n_fine;
  p.chunk_len_fine = len_fine;
  p.shift_fine = log2_pow2(len_fine);
  p.m_c_max_l2 = n_fine * len_fine;
  p.padded_cols = p.m_c_max_l2 * n_coarse;
  p.use_coarse = n_coarse > 1;
  p.n_chunks_coarse = n_coarse;
  p.chunk_len_coarse = p.m_c_max_l2;
  p.shift_coarse = log2_pow2(p.m_c_max_l2);
  return p;
}

SystemParams toy(std::uint64_t l2, std::uint64_t budget = std::uint64_t{1} << 30, std::uint64_t line = 64) {
  SystemParams s;
  s.l2_bytes = l2;
  s.memory_budget_bytes = budget;
  s.cache_line_bytes = line;
  return s;
}

std::vector<std::pair<Index, Real>> sorted_pairs(const AccumOutput& o) {
  std::vector<std::pair<Index, Real>> p;
  for (std::size_t k = 0; k < o.cols.size(); ++k) p.emplace_back(o.cols[k], o.vals[k]);
  std::sort(p.begin(), p.end());
  return p;
}

}  // namespace

TEST_CASE("fine-level reorder hand trace") {
  FineLevelWorkspace ws(2, 4, {}, Phase::Numeric);
  const std::vector<Index> cols{5, 1, 4, 1, 6};
  const std::vector<Real> vals{10, 20, 30, 40, 50};  // a, b, c, d, e
  ws.reorder(cols, vals);
  CHECK(std::vector<Offset>(ws.counts().begin(), ws.counts().end()) == std::vector<Offset>{2, 3});
  CHECK(std::vector<Offset>(ws.offsets().begin(), ws.offsets().end()) == std::vector<Offset>{0, 2, 5});
  CHECK(std::vector<Index>(ws.local_cols().begin(), ws.local_cols().end()) == std::vector<Index>{1, 1, 1, 0, 2});
  CHECK(std::vector<Real>(ws.local_vals().begin(), ws.local_vals().end()) == std::vector<Real>{20, 40, 10, 30, 50});
}

TEST_CASE("fine-level empty stream emits nothing") {
  FineLevelWorkspace ws(4, 8, {}, Phase::Numeric);
  ws.reorder({}, {});
  for (Offset c : ws.counts()) CHECK(c == 0);
  int calls = 0;
  ws.accumulate(0, [&](auto c, auto) { calls += c.empty() ? 0 : 1; });
  CHECK(calls == 0);
  CHECK(ws.count_distinct() == 0);
}

TEST_CASE("fine-level rejects out-of-range columns") {
  FineLevelWorkspace ws(2, 4, {}, Phase::Numeric);
  const std::vector<Index> cols{8};
  const std::vector<Real> vals{1};
  CHECK_THROWS_AS(ws.reorder(cols, vals), ContractViolation);
}

TEST_CASE("fine_level_chunk equals sort_accumulate") {
  SplitMix64 rng(99);
  for (int rep = 0; rep < 60; ++rep) {
    const Index n_fine = Index{1} << rng.below(6);
    const Index len = Index{1} << rng.below(8);
    const std::size_t n = rng.below(3000);
    std::vector<Index> cols(n);
    std::vector<Real> vals(n);
    for (std::size_t k = 0; k < n; ++k) {
      cols[k] = rng.below(n_fine * len);
      vals[k] = rep % 2 ? rng.uniform_open_closed() : static_cast<Real>(rng.below(5));
    }
    const AccumThresholds t{rep % 3 == 0 ? 16u : 256u, rep % 3 == 0 ? 4u : 32u};
    const auto got = fine_level_chunk(cols, vals, manual_plan(n_fine, len), t, 1000);
    auto want = sort_accumulate(cols, vals);
    for (auto& c : want.cols) c += 1000;
    // groups arrive in ascending column ranges
    for (std::size_t k = 1; k < got.cols.size(); ++k) {
      if ((got.cols[k] - 1000) / len != (got.cols[k - 1] - 1000) / len) CHECK(got.cols[k] > got.cols[k - 1]);
    }
    CHECK(sorted_pairs(got) == sorted_pairs(want));
  }
}

TEST_CASE("fine-level reorder is a stable permutation") {
  SplitMix64 rng(5);
  for (int rep = 0; rep < 100; ++rep) {
    const Index n_fine = Index{1} << rng.below(10);
    const Index len = Index{1} << rng.below(6);
    const std::size_t n = rng.below(std::size_t{1} << (rep < 5 ? 20 : 12));
    std::vector<Index> cols(n);
    std::vector<Real> vals(n);
    for (std::size_t k = 0; k < n; ++k) {
      cols[k] = rng.below(n_fine * len);
      vals[k] = static_cast<Real>(k);  // position tag
    }
    FineLevelWorkspace ws(n_fine, len, {}, Phase::Numeric);
    ws.reorder(cols, vals);
    std::vector<std::pair<Index, Real>> got;
    bool stable = true;
    for (Index c = 0; c < n_fine; ++c) {
      for (Offset p = ws.offsets()[c]; p < ws.offsets()[c + 1]; ++p) {
        got.emplace_back(c * len + ws.local_cols()[p], ws.local_vals()[p]);
        if (p > ws.offsets()[c] && ws.local_vals()[p] <= ws.local_vals()[p - 1]) stable = false;
      }
    }
    std::vector<std::pair<Index, Real>> want;
    for (std::size_t k = 0; k < n; ++k) want.emplace_back(cols[k], vals[k]);
    std::sort(got.begin(), got.end());
    std::sort(want.begin(), want.end());
    CHECK(stable);
    CHECK(got == want);
  }
}

TEST_CASE("fine-level row reads A and B directly") {
  const CsrMatrix b = test::random_csr(64, 64, 0.2, 4);
  const CsrMatrix a = test::random_csr(64, 64, 0.1, 5);
  const CsrMatrix want = spgemm_reference(a, b);
  FineLevelWorkspace ws(8, 8, {16, 4}, Phase::Numeric);
  for (Index i = 0; i < a.n_rows; ++i) {
    ws.reorder_row(a, b, i, Phase::Numeric);
    AccumOutput out;
    ws.accumulate(0, [&](auto c, auto v) {
      out.cols.insert(out.cols.end(), c.begin(), c.end());
      out.vals.insert(out.vals.end(), v.begin(), v.end());
    });
    AccumOutput row;
    row.cols.assign(want.row_cols(i).begin(), want.row_cols(i).end());
    row.vals.assign(want.row_vals(i).begin(), want.row_vals(i).end());
    CHECK(sorted_pairs(out) == sorted_pairs(row));
    ws.reorder_row(a, b, i, Phase::Symbolic);
    CHECK(ws.count_distinct() == want.row_nnz(i));
  }

  // single nonzero in A: the scaled B row
  const std::vector<Triplet> t{{0, 3, 2.0}};
  const CsrMatrix single = csr_from_triplets(t, 1, 64);
  ws.reorder_row(single, b, 0, Phase::Numeric);
  AccumOutput out;
  ws.accumulate(0, [&](auto c, auto v) {
    out.cols.insert(out.cols.end(), c.begin(), c.end());
    out.vals.insert(out.vals.end(), v.begin(), v.end());
  });
  auto p = sorted_pairs(out);
  REQUIRE(p.size() == b.row_nnz(3));
  for (std::size_t k = 0; k < p.size(); ++k) {
    CHECK(p[k].first == b.row_cols(3)[k]);
    CHECK(p[k].second == 2.0 * b.row_vals(3)[k]);
  }
}

TEST_CASE("coarse level on an 8x8 product with 2 coarse and 2 fine chunks") {
  // every row of B is full, so every fine chunk of every row is populated
  std::vector<Triplet> tb;
  for (Index j = 0; j < 8; ++j) {
    for (Index c = 0; c < 8; ++c) tb.push_back({j, c, 1.0});
  }
  const CsrMatrix b = csr_from_triplets(tb, 8, 8);
  const CsrMatrix a = test::random_csr(8, 8, 0.5, 3);
  const ChunkPlan plan = manual_plan(2, 2, 2);
  CoarseLevelWorkspace ws;
  ws.configure(plan, {0, 0}, 8);  // dense everywhere: one emission per fine chunk
  std::vector<Index> rows(8);
  for (Index i = 0; i < 8; ++i) rows[i] = i;
  ws.generate(a, b, rows, Phase::Numeric);
  CHECK(ws.offsets().size() == 8 * 2 + 1);
  CHECK(ws.offsets().back() == row_intermediate_stats(a, b).total());
  const CsrMatrix want = spgemm_reference(a, b);
  for (std::size_t r = 0; r < 8; ++r) {
    std::vector<std::pair<Index, Index>> ranges;
    AccumOutput out;
    ws.accumulate_row(r, [&](auto c, auto v) {
      if (c.empty()) return;
      ranges.emplace_back(*std::min_element(c.begin(), c.end()), *std::max_element(c.begin(), c.end()));
      out.cols.insert(out.cols.end(), c.begin(), c.end());
      out.vals.insert(out.vals.end(), v.begin(), v.end());
    });
    if (a.row_nnz(r) > 0) {
      CHECK(ranges == std::vector<std::pair<Index, Index>>{{0, 1}, {2, 3}, {4, 5}, {6, 7}});
    } else {
      CHECK(ranges.empty());
    }
    AccumOutput row;
    row.cols.assign(want.row_cols(r).begin(), want.row_cols(r).end());
    row.vals.assign(want.row_vals(r).begin(), want.row_vals(r).end());
    CHECK(sorted_pairs(out) == sorted_pairs(row));
  }
}

TEST_CASE("coarse reorder is a stable permutation") {
  SplitMix64 rng(8);
  for (int rep = 0; rep < 100; ++rep) {
    const Index n_coarse = Index{1} << (1 + rng.below(5));
    const Index len_fine = Index{1} << rng.below(4);
    const Index n_fine = Index{1} << rng.below(4);
    const ChunkPlan plan = manual_plan(n_fine, len_fine, n_coarse);
    const Index m = plan.padded_cols;
    const Index k = 1 + rng.below(40);
    const Index rows = 1 + rng.below(20);
    CsrMatrix a = test::random_csr(rows, k, 0.3, 100 + rep);
    // tag each A entry so products identify their origin
    for (std::size_t e = 0; e < a.val.size(); ++e) a.val[e] = static_cast<Real>(e + 1);
    const CsrMatrix b = test::random_csr(k, m, 0.3, 200 + rep);
    CoarseLevelWorkspace ws;
    ws.configure(plan, {}, k);
    std::vector<Index> batch(rows);
    for (Index i = 0; i < rows; ++i) batch[i] = i;
    ws.generate(a, b, batch, Phase::Numeric);
    for (Index r = 0; r < rows; ++r) {
      std::vector<std::pair<Index, Real>> got;
      for (Index c = 0; c < n_coarse; ++c) {
        const Offset lo = ws.offsets()[r * n_coarse + c];
        const Offset hi = ws.offsets()[r * n_coarse + c + 1];
        for (Offset p = lo; p < hi; ++p) {
          CHECK(ws.coarse_cols()[p] < plan.chunk_len_coarse);
          got.emplace_back(c * plan.chunk_len_coarse + ws.coarse_cols()[p], ws.coarse_vals()[p]);
        }
      }
      std::vector<std::pair<Index, Real>> want;
      for (Offset ka = a.row_ptr[r]; ka < a.row_ptr[r + 1]; ++ka) {
        for (Offset kb = b.row_ptr[a.col[ka]]; kb < b.row_ptr[a.col[ka] + 1]; ++kb) {
          want.emplace_back(b.col[kb], a.val[ka] * b.val[kb]);
        }
      }
      std::sort(got.begin(), got.end());
      std::sort(want.begin(), want.end());
      CHECK(got == want);
    }
  }
}

TEST_CASE("coarse rows of B are unique and sorted") {
  const CsrMatrix a = test::random_csr(10, 30, 0.3, 1);
  const CsrMatrix b = test::random_csr(30, 64, 0.2, 2);
  CoarseLevelWorkspace ws;
  ws.configure(manual_plan(2, 8, 4), {}, 30);
  const std::vector<Index> batch{2, 5, 7};
  ws.generate(a, b, batch, Phase::Symbolic);
  std::vector<Index> want;
  for (Index i : batch) want.insert(want.end(), a.row_cols(i).begin(), a.row_cols(i).end());
  std::sort(want.begin(), want.end());
  want.erase(std::unique(want.begin(), want.end()), want.end());
  CHECK(std::vector<Index>(ws.coarse_rows_b().begin(), ws.coarse_rows_b().end()) == want);
  CHECK(ws.csc().source_rows == batch);
}

TEST_CASE("magnus identity and simple products") {
  MagnusOptions opt;
  opt.system = SystemParams{};
  CHECK(spgemm_magnus(identity(9), identity(9), opt).c == identity(9));
  const CsrMatrix a = test::random_csr(20, 20, 0.3, 1);
  const auto r = spgemm_magnus(a, a, opt);
  CHECK(r.c == spgemm_reference(a, a));
  CHECK(r.counters.at("rows_sort") + r.counters.at("rows_dense") + r.counters.at("rows_fine") +
            r.counters.at("rows_coarse") ==
        20);
  for (const char* phase : {"setup", "symbolic", "numeric", "canonicalize"}) CHECK(r.phase_seconds.count(phase) == 1);
  CHECK_THROWS_AS(spgemm_magnus(identity(3), identity(4), opt), InputError);
}

TEST_CASE("magnus symbolic and numeric phases") {
  MagnusOptions opt;
  opt.system = toy(128, 1 << 20, 16);
  opt.thresholds = {16, 4};
  const CsrMatrix a = test::random_csr(60, 100, 0.2, 3);
  const CsrMatrix b = test::random_csr(100, 120, 0.2, 4);
  const auto setup = magnus_setup(a, b, opt);
  CHECK(setup.categories.total() == 60);
  const auto rp = magnus_symbolic(a, b, setup);
  const CsrMatrix want = spgemm_reference(a, b);
  CHECK(rp == want.row_ptr);
  CHECK(magnus_numeric(a, b, rp, setup).c == want);

  auto bad = rp;
  for (std::size_t i = 1; i < bad.size(); ++i) bad[i] += 1;
  CHECK_THROWS_AS(magnus_numeric(a, b, bad, setup), ContractViolation);
  CHECK_THROWS_AS(magnus_numeric(a, b, std::vector<Offset>{0}, setup), ContractViolation);
  const CsrMatrix other = test::random_csr(10, 100, 0.2, 5);
  CHECK_THROWS_AS(magnus_symbolic(other, b, setup), ContractViolation);
}

TEST_CASE("all four categories on one product") {
  // toy_sweep_cases covers the shapes; the first one mixes sort, dense and coarse
  for (const auto& vc : toy_sweep_cases(3)) {
    MagnusOptions opt;
    opt.system = vc.system;
    const auto r = spgemm_magnus(vc.a, vc.b, opt);
    CHECK(r.c == spgemm_reference(vc.a, vc.b));
    opt.force_fine_only = true;
    const auto f = spgemm_magnus(vc.a, vc.b, opt);
    CHECK(f.c == r.c);
    CHECK(f.counters.at("rows_coarse") == 0);
    CHECK(f.counters.at("use_coarse") == 0);
  }
  MagnusOptions opt;
  opt.system = toy(128, 1 << 20, 16);
  opt.thresholds = {16, 4};
  const CsrMatrix a = test::random_csr(128, 128, 0.04, 12);
  const CsrMatrix b = test::random_csr(128, 128, 0.15, 13);
  const auto r = spgemm_magnus(a, b, opt);
  CHECK(r.counters.at("rows_sort") > 0);
  CHECK(r.counters.at("rows_coarse") > 0);
  CHECK(r.c == spgemm_reference(a, b));
}

TEST_CASE("coarse batching under a tight budget") {
  const auto cases = toy_sweep_cases(1);
  const auto it = std::find_if(cases.begin(), cases.end(), [](const auto& c) { return c.name == "toy-l2-4k-coarse-batched"; });
  REQUIRE(it != cases.end());
  MagnusOptions opt;
  opt.system = it->system;
  const auto r = spgemm_magnus(it->a, it->b, opt);
  CHECK(r.counters.at("rows_coarse") > 0);
  CHECK(r.counters.at("coarse_batches") > 1);
  CHECK(r.c == spgemm_reference(it->a, it->b));

  opt.system->memory_budget_bytes = 16;
  CHECK_THROWS_AS(spgemm_magnus(it->a, it->b, opt), BudgetError);
}

TEST_CASE("magnus matches gustavson over a sweep of toy cache sizes") {
  const CsrMatrix a = gen_uniform_random({96, 4096, 12, 3, false});
  const CsrMatrix b = gen_uniform_random({4096, 1 << 15, 40, 4, false});
  const CsrMatrix band = gen_banded({300, 40, 1, false});
  const auto want = spgemm_gustavson_dense(a, b).c;
  const auto want_band = spgemm_gustavson_dense(band, band).c;
  for (unsigned e = 12; e <= 22; ++e) {
    MagnusOptions opt;
    opt.system = toy(std::uint64_t{1} << e, std::uint64_t{1} << 20);
    CHECK(spgemm_magnus(a, b, opt).c == want);
    CHECK(spgemm_magnus(band, band, opt).c == want_band);
  }
}

TEST_CASE("determinism") {
  MagnusOptions opt;
  opt.system = toy(4096, 1 << 16);
  const CsrMatrix a = gen_uniform_random({64, 512, 10, 1, true});
  const CsrMatrix b = gen_uniform_random({512, 1 << 16, 30, 2, true});
  opt.threads = 1;
  const auto first = spgemm_magnus(a, b, opt).c;
  for (int rep = 0; rep < 3; ++rep) CHECK(spgemm_magnus(a, b, opt).c == first);
  opt.threads = 4;
  // addition order does not depend on scheduling, so even real values match
  CHECK(spgemm_magnus(a, b, opt).c == first);
}

TEST_CASE("warnings for many coarse chunks") {
  MagnusOptions opt;
  opt.system = toy(1024, 1 << 30, 64);
  const CsrMatrix a = identity(4);
  CsrMatrix b(4, Index{1} << 26);
  const auto setup = magnus_setup(a, b, opt);
  CHECK(setup.plans.numeric.use_coarse);
  CHECK(setup.plans.numeric.n_chunks_coarse > 8192);
  CHECK(setup.warnings.size() == 1);
}
