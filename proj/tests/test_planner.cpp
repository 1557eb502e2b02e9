#include <doctest.h>

#include "magnus/errors.hpp"
#include "magnus/planner.hpp"
#include "magnus/random.hpp"

using namespace magnus;

namespace {

SystemParams sys_with(std::uint64_t l2, std::uint64_t val_bytes = 8, std::uint64_t line = 64) {
  SystemParams s;
  s.l2_bytes = l2;
  s.val_bytes = val_bytes;
  s.cache_line_bytes = line;
  return s;
}

// f(n) <= f(other) for f(n) = m sD / n + n sC, compared exactly.
bool storage_le(Index m, Index n, Index other, std::uint64_t sd, std::uint64_t sc) {
  using u128 = unsigned __int128;
  const u128 lhs = (u128(m) * sd + u128(n) * n * sc) * other;
  const u128 rhs = (u128(m) * sd + u128(other) * other * sc) * n;
  return lhs <= rhs;
}

}  // namespace

TEST_CASE("numeric plan for 2^18 columns") {
  const ChunkPlan p = compute_chunk_plan(sys_with(1 << 20, 4), Index{1} << 18, Phase::Numeric);
  CHECK(p.s_dense_accum == 5);
  CHECK(p.s_chunk_fine == 136);
  CHECK_FALSE(p.use_coarse);
  CHECK(p.n_chunks_fine == 128);
  CHECK(p.chunk_len_fine == 2048);
  CHECK(p.shift_fine == 11);
  CHECK(p.n_chunks_fine * p.chunk_len_fine == p.padded_cols);
}

TEST_CASE("symbolic crossovers") {
  CHECK(max_l2_columns(Index{1} << 21, 1, 136) == Index{1} << 32);
  CHECK(max_l2_columns(Index{1} << 20, 1, 136) == Index{1} << 30);

  const auto spr = compute_chunk_plan(sys_with(Index{1} << 21), Index{1} << 33, Phase::Symbolic);
  CHECK(spr.use_coarse);
  CHECK(spr.m_c_max_l2 == Index{1} << 32);
  CHECK(spr.n_chunks_coarse == 2);
  CHECK(spr.chunk_len_coarse == Index{1} << 32);
  CHECK(spr.shift_coarse == 32);
  CHECK(spr.n_chunks_fine * spr.chunk_len_fine == spr.m_c_max_l2);

  // coarse level starts right above the crossover
  const auto skx = sys_with(Index{1} << 20);
  CHECK_FALSE(compute_chunk_plan(skx, Index{1} << 30, Phase::Symbolic).use_coarse);
  CHECK(compute_chunk_plan(skx, (Index{1} << 30) + 1, Phase::Symbolic).use_coarse);
  CHECK(compute_chunk_plan(skx, Index{1} << 31, Phase::Symbolic).use_coarse);
  CHECK_FALSE(compute_chunk_plan(sys_with(Index{1} << 21), Index{1} << 32, Phase::Symbolic).use_coarse);
}

TEST_CASE("use_coarse iff optimal storage exceeds l2") {
  SplitMix64 rng(17);
  for (int rep = 0; rep < 200; ++rep) {
    const auto sys = sys_with(Index{1} << (10 + rng.below(13)), 4 + 4 * rng.below(2), Index{1} << (4 + rng.below(4)));
    const Index m = Index{1} << rng.below(44);
    for (Phase ph : {Phase::Symbolic, Phase::Numeric}) {
      const auto p = compute_chunk_plan(sys, m, ph);
      const double s = optimal_fine_level_storage(p.padded_cols, p.s_dense_accum, p.s_chunk_fine);
      const double l2 = static_cast<double>(sys.l2_bytes);
      if (s > l2 * (1 + 1e-12)) CHECK(p.use_coarse);
      if (s < l2 * (1 - 1e-12)) CHECK_FALSE(p.use_coarse);
      CHECK_FALSE(compute_chunk_plan(sys, m, ph, false).use_coarse);
    }
  }
}

TEST_CASE("plan invariants") {
  SplitMix64 rng(23);
  for (int rep = 0; rep < 300; ++rep) {
    const auto sys = sys_with(Index{1} << (10 + rng.below(13)), 1 + rng.below(8), Index{1} << (3 + rng.below(5)));
    const Index m = 1 + rng.below(Index{1} << rng.below(40));
    for (Phase ph : {Phase::Symbolic, Phase::Numeric}) {
      const auto p = compute_chunk_plan(sys, m, ph);
      CHECK(p.padded_cols == ceil_pow2(m));
      CHECK(std::has_single_bit(p.n_chunks_fine));
      CHECK(std::has_single_bit(p.chunk_len_fine));
      CHECK(p.shift_fine == log2_pow2(p.chunk_len_fine));
      CHECK(p.s_chunk_fine == 8 + 2 * sys.cache_line_bytes);
      CHECK(p.s_dense_accum == (ph == Phase::Numeric ? sys.val_bytes + 1 : 1));
      CHECK(p.n_chunks_fine >= 1);
      CHECK(p.n_chunks_fine * p.chunk_len_fine == (p.use_coarse ? p.m_c_max_l2 : p.padded_cols));
      CHECK(p.chunk_len_fine >= std::min<Index>(p.m_c_max_l2, sys.cache_line_bytes / sizeof(Index)));
      if (p.use_coarse) {
        CHECK(p.n_chunks_coarse == p.padded_cols / p.m_c_max_l2);
        CHECK(p.chunk_len_coarse == p.m_c_max_l2);
        CHECK(p.shift_coarse == log2_pow2(p.chunk_len_coarse));
      }
    }
  }
}

TEST_CASE("fine chunk count is a discrete optimum") {
  SplitMix64 rng(31);
  int checked = 0;
  for (int rep = 0; rep < 50; ++rep) {
    const auto sys = sys_with(Index{1} << (12 + rng.below(11)), 4 + 4 * rng.below(2), 64);
    const Index m = Index{1} << (12 + rng.below(30));
    const auto p = compute_chunk_plan(sys, m, rep % 2 ? Phase::Numeric : Phase::Symbolic);
    const Index range = p.m_c_max_l2;
    const Index min_len = 8;
    const Index n = p.n_chunks_fine;
    if (n > 1) CHECK(storage_le(range, n, n / 2, p.s_dense_accum, p.s_chunk_fine));
    if (range / (2 * n) >= min_len) CHECK(storage_le(range, n, 2 * n, p.s_dense_accum, p.s_chunk_fine));
    ++checked;
  }
  CHECK(checked == 50);
}

TEST_CASE("planner monotonicity") {
  Index last = 0;
  for (unsigned e = 10; e <= 30; ++e) {
    const Index m = max_l2_columns(Index{1} << e, 1, 136);
    CHECK(m >= last);
    last = m;
  }
  const auto sys = sys_with(4096);
  Index last_chunks = 0;
  for (unsigned e = 0; e <= 40; ++e) {
    const auto p = compute_chunk_plan(sys, Index{1} << e, Phase::Symbolic);
    CHECK(p.n_chunks_coarse >= last_chunks);
    last_chunks = p.n_chunks_coarse;
  }
}

TEST_CASE("phase plans share the coarse decision") {
  SplitMix64 rng(5);
  for (int rep = 0; rep < 100; ++rep) {
    const auto sys = sys_with(Index{1} << (10 + rng.below(13)), 4 + 4 * rng.below(2));
    const Index m = 1 + rng.below(Index{1} << rng.below(40));
    const auto pp = compute_phase_plans(sys, m);
    CHECK(pp.symbolic.use_coarse == pp.numeric.use_coarse);
    CHECK(pp.symbolic.m_c_max_l2 == pp.numeric.m_c_max_l2);
    CHECK(pp.symbolic.n_chunks_coarse == pp.numeric.n_chunks_coarse);
    CHECK(pp.numeric.n_chunks_fine * pp.numeric.chunk_len_fine == pp.numeric.m_c_max_l2);
    CHECK(pp.numeric.s_dense_accum == sys.val_bytes + 1);
  }
}

TEST_CASE("fine-level storage") {
  CHECK(fine_level_storage(1024, 4, 1, 136) == doctest::Approx(256 + 544));
  CHECK(optimal_fine_level_storage(1024, 1, 136) <= fine_level_storage(1024, 4, 1, 136));
}

TEST_CASE("categorize_row") {
  const auto sys = sys_with(4096, 4);
  const AccumThresholds t;
  const auto narrow = compute_chunk_plan(sys, 1024, Phase::Numeric);
  CHECK(categorize_row(0, 0, narrow, sys, t) == RowCategory::Sort);
  CHECK(categorize_row(255, 900, narrow, sys, t) == RowCategory::Sort);
  CHECK(categorize_row(300, 100, narrow, sys, t) == RowCategory::Dense);
  CHECK(categorize_row(300, 819, narrow, sys, t) == RowCategory::Dense);
  CHECK(categorize_row(300, 820, narrow, sys, t) == RowCategory::FineLevel);

  const auto wide = compute_phase_plans(sys, Index{1} << 20).numeric;
  CHECK(wide.use_coarse);
  CHECK(categorize_row(300, 100, wide, sys, t) == RowCategory::Dense);
  CHECK(categorize_row(300, 500000, wide, sys, t) == RowCategory::CoarseLevel);
}

TEST_CASE("categorize_rows partitions rows") {
  RowStats s;
  s.inter_size = {0, 10, 300, 300, 300};
  s.min_col = {0, 0, 0, 0, 0};
  s.max_col = {0, 5, 50, 5000, 900000};
  const auto sys = sys_with(4096, 4);
  const auto plan = compute_phase_plans(sys, Index{1} << 20).numeric;
  const auto cats = categorize_rows(s, plan, sys, {});
  CHECK(cats.sort_rows == std::vector<Index>{0, 1});
  CHECK(cats.dense_rows == std::vector<Index>{2});
  CHECK(cats.coarse_rows == std::vector<Index>{3, 4});
  CHECK(cats.total() == 5);
}

TEST_CASE("build_coarse_batches") {
  auto sys = sys_with(Index{1} << 30);
  const auto plan = compute_chunk_plan(sys_with(4096), Index{1} << 20, Phase::Numeric);
  REQUIRE(plan.use_coarse);
  RowStats s;
  s.inter_size.assign(10, 100);
  s.min_col.assign(10, 0);
  s.max_col.assign(10, 1000);
  std::vector<Index> rows(10);
  for (Index i = 0; i < 10; ++i) rows[i] = i;

  SUBCASE("one small row") {
    const std::vector<Index> one{3};
    CHECK(build_coarse_batches(one, s, plan, sys).size() == 1);
  }
  SUBCASE("budget for three rows") {
    sys.memory_budget_bytes = 3 * 100 * kCoarseElementBytes;
    const auto b = build_coarse_batches(rows, s, plan, sys);
    REQUIRE(b.size() == 4);
    CHECK(b[0] == std::vector<Index>{0, 1, 2});
    CHECK(b[3] == std::vector<Index>{9});
  }
  SUBCASE("one row per batch") {
    sys.memory_budget_bytes = 100 * kCoarseElementBytes;
    CHECK(build_coarse_batches(rows, s, plan, sys).size() == 10);
  }
  SUBCASE("metadata limit") {
    sys.l2_bytes = 2 * coarse_row_metadata_bytes(plan, sys);
    const auto b = build_coarse_batches(rows, s, plan, sys);
    CHECK(b.size() == 5);
  }
  SUBCASE("row over budget") {
    sys.memory_budget_bytes = 99 * kCoarseElementBytes;
    try {
      build_coarse_batches(rows, s, plan, sys);
      FAIL("expected BudgetError");
    } catch (const BudgetError& e) {
      CHECK(e.row() == 0);
    }
  }
}

TEST_CASE("system params validation") {
  SystemParams s;
  CHECK_NOTHROW(s.validate());
  s.cache_line_bytes = 48;
  CHECK_THROWS_AS(s.validate(), InputError);
  s.cache_line_bytes = 64;
  s.l2_bytes = 0;
  CHECK_THROWS_AS(s.validate(), InputError);
  const auto d = detect_system();
  CHECK_NOTHROW(d.params.validate());
}
