#include <gtest/gtest.h>

#include "radmax/experiments.hpp"

using namespace radmax;

namespace {

StepFunction dyadic_random(int n, int N, std::size_t d, std::uint64_t seed) {
  Rng rng(seed);
  return random_function(DyadicTree::lebesgue(n, N), NormedSpace(d, 1), rng, true);
}

}  // namespace

TEST(Window, Geometry) {
  WindowGrid g(2, 2);
  EXPECT_EQ(g.cell_count(), 144u);
  EXPECT_EQ(g.lo(), -4);
  EXPECT_EQ(g.hi(), 8);
  std::vector<std::int64_t> a{-4, 7};
  EXPECT_TRUE(g.inside(a));
  EXPECT_EQ(g.corner(g.index(a)), a);
  std::vector<std::int64_t> b{8, 0};
  EXPECT_FALSE(g.inside(b));
  EXPECT_THROW(WindowGrid(0, 2), std::invalid_argument);
}

TEST(Shifted, Validation) {
  EXPECT_THROW(ShiftedSystem(1, 3, {{0, {1}}}), std::invalid_argument);
  EXPECT_THROW(ShiftedSystem(1, 3, {{4, {1}}}), std::invalid_argument);
  EXPECT_THROW(ShiftedSystem(2, 3, {{1, {1}}}), std::invalid_argument);
  EXPECT_THROW(ShiftedSystem(1, 3, {{1, {2}}}), std::invalid_argument);
  auto f = embed(dyadic_random(1, 2, 1, 1), 3);
  EXPECT_THROW(shifted_average(ShiftedSystem(1, 3, {}), 4, f), std::out_of_range);
  EXPECT_THROW(embed(dyadic_random(1, 4, 1, 1), 3), std::invalid_argument);
}

TEST(Shifted, ShiftArithmetic) {
  ShiftedSystem s(1, 3, {{1, {1}}, {3, {1}}});
  EXPECT_EQ(s.shift(0), (std::vector<std::int64_t>{4 + 1}));
  EXPECT_EQ(s.shift(1), (std::vector<std::int64_t>{1}));
  EXPECT_EQ(s.shift(3), (std::vector<std::int64_t>{0}));
  EXPECT_EQ(s.sigma(1), (std::vector<std::int64_t>{4}));
  EXPECT_EQ(s.sigma(2), (std::vector<std::int64_t>{0}));
}

TEST(Shifted, ZeroBetaIsStandard) {
  auto F = embed(dyadic_random(2, 2, 2, 5), 3);
  ShiftedSystem zero(2, 3, {});
  for (int k = 0; k <= 3; ++k) EXPECT_EQ(shifted_average(zero, k, F).values, standard_average(k, F).values);
}

TEST(Shifted, StandardAverageMatchesTree) {
  auto f = dyadic_random(2, 3, 2, 9);
  auto F = embed(f, 3);
  for (int k = 0; k <= 3; ++k) {
    auto A = standard_average(k, F);
    auto Af = averaging_operator(f, k);
    for (std::size_t l = 0; l < f.leaf_count(); ++l) {
      auto m = f.tree()->leaf(l).coords();
      std::vector<std::int64_t> a(m.begin(), m.end());
      auto v = A.value(A.grid.index(a));
      for (std::size_t j = 0; j < 2; ++j) EXPECT_EQ(v[j], Af.value(l)[j]);
    }
  }
}

TEST(Shifted, ConjugationIdentityExact) {
  for (std::uint64_t seed = 0; seed < 20; ++seed) {
    Rng rng(seed);
    const int n = 1 + static_cast<int>(seed % 2), N = 1 + static_cast<int>(seed % 3), M = N + 2;
    auto f = dyadic_random(n, std::min(M, 2), 2, seed + 100);
    auto sys = ShiftedSystem::random(n, M, rng);
    auto F = embed(f, M);
    for (int k = N; k <= M; ++k) EXPECT_EQ(shifted_average(sys, k, F).values, conjugated_average(sys, N, k, F).values);
  }
}

TEST(Shifted, SingleBetaIsGridShift) {
  // beta_{N+1} only: levels k >= N see the shift 2^{-(N+1)}, a leaf permutation of the grid
  const int N = 1, M = 3;
  ShiftedSystem sys(1, M, {{N + 1, {1}}});
  auto F = embed(dyadic_random(1, 2, 1, 4), M);
  auto s = sys.shift(N);
  EXPECT_EQ(s, (std::vector<std::int64_t>{2}));
  auto back = translate(negate_translate(F, s), s);
  EXPECT_EQ(back.values, F.values);
  for (int k = N; k <= M; ++k) EXPECT_EQ(shifted_average(sys, k, F).values, conjugated_average(sys, N, k, F).values);
}

TEST(Shifted, CompositionOnIndicators) {
  Rng rng(7);
  for (int t = 0; t < 10; ++t) {
    const int n = 1 + t % 2, M = 4;
    auto sys = ShiftedSystem::random(n, M, rng);
    auto f = dyadic_random(n, 2, 1, 50 + t);
    auto s = systems_item(f, sys, 1, EstimatorConfig{}, 2, false);
    EXPECT_EQ(s.composition_mismatches, 0u);
    EXPECT_EQ(s.identity_mismatches, 0u);
    EXPECT_EQ(s.norm_f, s.norm_translated);
  }
}

TEST(Shifted, TruncatedRmfBothRoutesAgree) {
  Rng rng(12);
  EstimatorConfig cfg;
  cfg.max_len = 3;
  cfg.restarts = 1;
  for (int t = 0; t < 4; ++t) {
    auto sys = ShiftedSystem::random(1, 4, rng);
    auto f = dyadic_random(1, 2, 2, 70 + t);
    auto s = systems_item(f, sys, 2, cfg, 2);
    EXPECT_GT(s.rmf_cells, 0u);
    EXPECT_LE(s.rmf_max_diff, 1e-9);
  }
}
