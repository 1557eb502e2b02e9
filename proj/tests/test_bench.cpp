#include <doctest.h>

#include <sstream>

#include "helpers.hpp"
#include "magnus/bench.hpp"
#include "magnus/errors.hpp"
#include "magnus/generators.hpp"
#include "magnus/verify.hpp"

using namespace magnus;

TEST_CASE("ideal bound examples") {
  IdealBoundInputs zero;
  zero.n_a = 4;
  zero.n_c = 4;
  zero.s_row_ptr = 8;
  const auto z = ideal_bound(zero);
  CHECK(z.read_bytes == 80);
  CHECK(z.write_bytes == 40);

  IdealBoundInputs hand;
  hand.n_a = 2;
  hand.nnz_a = 3;
  hand.n_inter_prod = 5;
  hand.s_row_ptr = 8;
  hand.s_col_idx = 4;
  hand.s_val = 4;
  CHECK(ideal_bound(hand).read_bytes == 240);

  hand.bandwidth_bytes_per_sec = 1e9;
  const double t1 = ideal_bound(hand).seconds;
  hand.bandwidth_bytes_per_sec = 2e9;
  CHECK(ideal_bound(hand).seconds == doctest::Approx(t1 / 2));

  hand.bandwidth_bytes_per_sec = 0;
  CHECK_THROWS_AS(ideal_bound(hand), InputError);
}

TEST_CASE("ideal bound is linear in each count") {
  SplitMix64 rng(2);
  for (int rep = 0; rep < 100; ++rep) {
    IdealBoundInputs in;
    in.n_a = rng.below(1000);
    in.nnz_a = rng.below(100000);
    in.n_inter_prod = rng.below(1000000);
    in.n_c = rng.below(1000);
    in.nnz_c = rng.below(100000);
    const auto base = ideal_bound(in);
    const std::uint64_t d = 1 + rng.below(1000);
    // each count contributes a fixed number of bytes per unit
    auto probe = [&](std::uint64_t IdealBoundInputs::*field, std::uint64_t read_per, std::uint64_t write_per) {
      IdealBoundInputs x = in;
      x.*field += d;
      const auto r = ideal_bound(x);
      CHECK(r.read_bytes - base.read_bytes == d * read_per);
      CHECK(r.write_bytes - base.write_bytes == d * write_per);
    };
    probe(&IdealBoundInputs::n_a, 2 * in.s_row_ptr, 0);
    probe(&IdealBoundInputs::nnz_a, 4 * in.s_row_ptr + 2 * in.s_col_idx + in.s_val, 0);
    probe(&IdealBoundInputs::n_inter_prod, 2 * in.s_col_idx + in.s_val, 0);
    probe(&IdealBoundInputs::n_c, 0, in.s_row_ptr);
    probe(&IdealBoundInputs::nnz_c, 0, in.s_col_idx + in.s_val);
  }
}

TEST_CASE("ideal bound inputs from a product") {
  const CsrMatrix a = test::random_csr(30, 30, 0.2, 1);
  const auto r = run_spgemm(Algorithm::Esc, a, a);
  const auto in = ideal_bound_inputs(a, r, 1e9);
  CHECK(in.n_a == 30);
  CHECK(in.nnz_a == a.nnz());
  CHECK(in.n_inter_prod == row_intermediate_stats(a, a).total());
  CHECK(in.nnz_c == r.c.nnz());
  CHECK(in.s_col_idx == 4);
}

TEST_CASE("bandwidth") {
  const auto r = measure_bandwidth(std::uint64_t{1} << 22, 3);
  CHECK(r.bytes_per_second > 0);
  CHECK(r.rep_seconds.size() == 3);
  const std::uint64_t n = (std::uint64_t{1} << 22) / 16;
  CHECK(r.bytes_moved == 2 * (n * 8 + n * 8));
  CHECK_THROWS_AS(measure_bandwidth(1 << 20, 0), InputError);
}

TEST_CASE("microbench stages verify themselves") {
  for (std::uint64_t nc : {1u, 4u, 64u, 1024u}) {
    const auto recs = microbench_building_blocks({1 << 16, 1 << 12, 3}, nc, 2);
    CHECK(recs.size() == 7 * 2);
    for (const auto& r : recs) {
      CHECK(r.check_ok);
      CHECK(r.seconds > 0);
    }
  }
  // non-power-of-two length
  for (const auto& r : microbench_building_blocks({5000, 1000, 3}, 8, 1)) CHECK(r.check_ok);
  CHECK_THROWS_AS(microbench_building_blocks({100, 64, 1}, 3, 1), InputError);
  CHECK_THROWS_AS(microbench_building_blocks({100, 64, 1}, 128, 1), InputError);
  CHECK_THROWS_AS(microbench_building_blocks({100, 0, 1}, 1, 1), InputError);
}

TEST_CASE("multiset hash ignores order") {
  std::vector<Index> c{1, 5, 3, 5};
  std::vector<Real> v{1, 2, 3, 4};
  const auto h = multiset_hash(c, v);
  std::vector<Index> c2{5, 3, 5, 1};
  std::vector<Real> v2{4, 3, 2, 1};
  CHECK(multiset_hash(c2, v2) == h);
  v2[0] = 2;
  v2[2] = 4;
  CHECK(multiset_hash(c2, v2) == h);
  v2[1] = 3.5;
  CHECK(multiset_hash(c2, v2) != h);
}

TEST_CASE("csv and json records") {
  std::vector<BenchRecord> recs{{"histogram", {{"size", "8"}, {"n_chunks", "2"}}, 0.5, 16, "elements/s", 0, true}};
  std::ostringstream csv;
  write_csv(csv, recs);
  CHECK(csv.str() == "benchmark,params,repetition,seconds,rate,unit,check\nhistogram,size=8;n_chunks=2,0,0.5,16,elements/s,ok\n");
  std::ostringstream js;
  write_json(js, recs);
  CHECK(js.str().find("\"benchmark\": \"histogram\"") != std::string::npos);
}

TEST_CASE("spgemm benchmark protocol") {
  const CsrMatrix a = gen_rmat({8, 8, 0.57, 0.19, 0.19, 1, false});
  SpgemmBenchConfig cfg;
  cfg.reps = 3;
  cfg.options.system = SystemParams{};
  cfg.bandwidth = 1e10;
  const auto s = benchmark_spgemm(a, a, cfg);
  CHECK(s.records.size() == 3);
  CHECK(s.phases.count("total") == 1);
  CHECK(s.phases.at("total").min <= s.phases.at("total").mean);
  CHECK(s.bound_ratio.has_value());
  CHECK(s.last.c == spgemm_reference(a, a));
  cfg.reps = 0;
  CHECK_THROWS_AS(benchmark_spgemm(a, a, cfg), InputError);
}

TEST_CASE("algorithms agree on an R-mat square") {
  const CsrMatrix a = gen_rmat({10, 16, 0.57, 0.19, 0.19, 1, false});
  std::optional<Offset> nnz;
  for (Algorithm algo : kAllAlgorithms) {
    const auto r = run_spgemm(algo, a, a);
    if (!nnz) nnz = r.c.nnz();
    CHECK(r.c.nnz() == *nnz);
  }
  CHECK(parse_algorithm("magnus-fine-only") == Algorithm::MagnusFineOnly);
  CHECK_THROWS_AS(parse_algorithm("mkl"), InputError);
}

TEST_CASE("verify corpus") {
  VerifyConfig cfg;
  cfg.n_random = 20;
  const auto ok = run_verify(cfg);
  CHECK(ok.passed());

  cfg.inject_fault = "bipartite";
  const auto bad = run_verify(cfg);
  CHECK_FALSE(bad.passed());
  for (const auto& o : bad.outcomes) {
    const bool hit = o.case_name.find("bipartite") != std::string::npos && o.algo == Algorithm::Magnus;
    CHECK(o.passed == !hit);
  }

  cfg.inject_fault.clear();
  cfg.filter = "no-such-case";
  CHECK_THROWS_AS(run_verify(cfg), InputError);
}

TEST_CASE("compare_to_oracle") {
  const CsrMatrix a = test::random_csr(10, 10, 0.5, 1, false);
  CsrMatrix b = a;
  CHECK(compare_to_oracle(b, a, true).empty());
  b.val[0] *= 1 + 1e-7;
  CHECK_FALSE(compare_to_oracle(b, a, true).empty());
  CHECK(compare_to_oracle(b, a, false).empty());
  b.val[0] *= 1 + 1e-4;
  CHECK_FALSE(compare_to_oracle(b, a, false).empty());
}
