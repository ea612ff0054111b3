#include <gtest/gtest.h>

#include "oracles.hpp"
#include "radmax/rademacher.hpp"

using namespace radmax;

namespace {

std::vector<Vec> random_set(Rng& rng, std::size_t m, std::size_t d) {
  std::vector<Vec> S(m, Vec(d));
  for (auto& v : S)
    for (auto& x : v) x = gaussian(rng);
  return S;
}

double max_norm(const NormedSpace& X, const std::vector<Vec>& S) {
  double m = 0;
  for (auto& v : S) m = std::max(m, X.norm(v));
  return m;
}

double sum_sq(const Selection& s) {
  double a = 0;
  for (double c : s.coeffs) a += c * c;
  return a;
}

const double kPs[] = {1, 1.5, 2, 3, kInf};

}  // namespace

TEST(RademacherNorm, Examples) {
  EXPECT_EQ(rademacher_norm(NormedSpace(2, 2), std::vector<Vec>{{3, 4}}, std::vector<double>{1}), 5);
  const double r = 1 / std::sqrt(2.0);
  EXPECT_NEAR(rademacher_norm(NormedSpace(2, 1), std::vector<Vec>{{1, 0}, {0, 1}}, std::vector<double>{r, r}),
              std::sqrt(2.0), 1e-15);
  EXPECT_NEAR(rademacher_norm(NormedSpace(2, 2), std::vector<Vec>{{1, 0}, {0, 2}}, std::vector<double>{0.6, 0.8}),
              std::sqrt(2.92), 1e-15);
}

TEST(RademacherNorm, MatchesFullEnumeration) {
  Rng rng(11);
  for (int t = 0; t < 300; ++t) {
    const std::size_t k = 1 + rng() % 7, d = 1 + rng() % 5;
    const double p = kPs[rng() % 5];
    auto S = random_set(rng, k, d);
    if (rng() % 3 == 0) S.back() = S.front();  // repeated columns
    if (rng() % 4 == 0) S[0][0] = 0;
    std::vector<double> lam(k);
    for (auto& x : lam) x = gaussian(rng);
    const double want = oracle::rademacher(S, lam, p);
    EXPECT_NEAR(rademacher_norm(NormedSpace(d, p), S, lam), want, 1e-12 * (1 + want));
  }
}

TEST(RademacherNorm, Errors) {
  const NormedSpace X(2, 1);
  std::vector<Vec> many(25, Vec{1, 0});
  EXPECT_THROW(rademacher_norm(X, many, std::vector<double>(25, 0.1)), CapExceeded);
  EXPECT_NO_THROW(rademacher_norm(X, many, std::vector<double>(25, 0.1), 25));
  EXPECT_THROW(rademacher_norm(X, std::vector<Vec>{{1, 0, 0}}, std::vector<double>{1}), std::invalid_argument);
  EXPECT_THROW(rademacher_norm(X, std::vector<Vec>{{1, 0}}, std::vector<double>{1, 2}), std::invalid_argument);
  EXPECT_THROW(rademacher_norm(X, std::vector<Vec>{}, std::vector<double>{}), std::invalid_argument);
}

TEST(Oracle, Examples) {
  for (double p : kPs) {
    const NormedSpace X(3, p);
    std::vector<Vec> S{{1, -2, 0.5}};
    auto e = rbound_oracle(X, S);
    EXPECT_NEAR(e.lower, X.norm(S[0]), 1e-12);
    EXPECT_NEAR(e.upper, X.norm(S[0]), 1e-12);
  }
  auto h = rbound_oracle(NormedSpace(2, 2), std::vector<Vec>{{1, 0}, {0, 2}});
  EXPECT_NEAR(h.lower, 2, 1e-12);
  EXPECT_EQ(h.upper, 2);
  EXPECT_EQ(h.upper_method, UpperMethod::hilbert_exact);

  OracleConfig c;
  c.max_len = 4;
  auto l1 = rbound_oracle(NormedSpace(2, 1), std::vector<Vec>{{1, 0}, {0, 1}}, c);
  EXPECT_NEAR(l1.lower, std::sqrt(2.0), 1e-9);
  ASSERT_EQ(l1.lower_witness.indices.size(), 2u);
  std::vector<std::size_t> idx = l1.lower_witness.indices;
  std::sort(idx.begin(), idx.end());
  EXPECT_EQ(idx, (std::vector<std::size_t>{0, 1}));
  for (double x : l1.lower_witness.coeffs) EXPECT_NEAR(std::abs(x), 1 / std::sqrt(2.0), 1e-6);
}

TEST(Oracle, CapGuard) {
  Rng rng(2);
  auto S = random_set(rng, 40, 2);
  OracleConfig c;
  c.max_len = 4;
  EXPECT_THROW(rbound_oracle(NormedSpace(2, 1), S, c), CapExceeded);
  EXPECT_EQ(multiset_count(3, 2, 1000), 3u + 6u);
}

TEST(Oracle, Invariants) {
  Rng rng(5);
  for (int t = 0; t < 40; ++t) {
    const std::size_t m = 1 + rng() % 3, d = 1 + rng() % 3;
    const double p = kPs[rng() % 5];
    const NormedSpace X(d, p);
    auto S = random_set(rng, m, d);
    OracleConfig c;
    c.max_len = 3;
    c.grid = 4;
    auto e = rbound_oracle(X, S, c);
    EXPECT_GE(e.lower, max_norm(X, S));
    EXPECT_LE(e.lower, e.upper * (1 + 1e-12));
    EXPECT_LE(sum_sq(e.lower_witness), 1 + 1e-12);
    EXPECT_EQ(e.lower, rademacher_norm(X, S, e.lower_witness));
    if (p == 2) {
      EXPECT_NEAR(e.lower, max_norm(X, S), 1e-9);
      EXPECT_NEAR(e.upper, max_norm(X, S), 1e-9);
    }
    // adding a vector never lowers the oracle value
    auto S2 = S;
    S2.push_back(random_set(rng, 1, d)[0]);
    EXPECT_GE(rbound_oracle(X, S2, c).lower, e.lower);
  }
}

TEST(Lower, Examples) {
  Rng rng(8);
  for (int t = 0; t < 30; ++t) {
    const std::size_t d = 1 + rng() % 6;
    const NormedSpace X(d, 2);
    auto S = random_set(rng, 1 + rng() % 9, d);
    EXPECT_NEAR(rbound_lower(X, S).lower, max_norm(X, S), 1e-6);
  }
  LowerConfig c;
  c.max_len = 2;
  c.restarts = 8;
  c.seed = 42;
  EXPECT_GE(rbound_lower(NormedSpace(2, 1), std::vector<Vec>{{1, 0}, {0, 1}}, c).lower, std::sqrt(2.0) - 1e-6);
  EXPECT_THROW(rbound_lower(NormedSpace(2, 1), std::vector<Vec>{}), std::invalid_argument);
}

TEST(Lower, WarmStartMonotone) {
  Rng rng(21);
  for (int t = 0; t < 40; ++t) {
    const std::size_t m = 2 + rng() % 6, d = 2 + rng() % 4;
    const NormedSpace X(d, rng() % 2 ? 1.0 : kInf);
    auto S = random_set(rng, m, d);
    Selection w;
    for (std::size_t i = 0; i < m; ++i) w.indices.push_back(i), w.coeffs.push_back(gaussian(rng));
    double n = 0;
    for (double x : w.coeffs) n += x * x;
    for (auto& x : w.coeffs) x /= std::sqrt(n);
    LowerConfig c;
    c.max_len = 2;
    c.restarts = 0;
    c.warm_starts = {w};
    auto e = rbound_lower(X, S, c);
    EXPECT_GE(e.lower, rademacher_norm(X, S, w));
    EXPECT_GE(e.lower, max_norm(X, S));
    EXPECT_LE(e.lower, e.upper * (1 + 1e-12));
    EXPECT_EQ(e.lower, rademacher_norm(X, S, e.lower_witness));
    EXPECT_LE(sum_sq(e.lower_witness), 1 + 1e-12);
  }
}

TEST(Lower, Deterministic) {
  Rng rng(1);
  auto S = random_set(rng, 6, 4);
  LowerConfig c;
  c.seed = 77;
  const NormedSpace X(4, 1);
  EXPECT_EQ(rbound_lower(X, S, c), rbound_lower(X, S, c));
}

TEST(Lower, NeverAboveOracleCertificate) {
  Rng rng(31);
  for (int t = 0; t < 20; ++t) {
    const NormedSpace X(2, 1);
    auto S = random_set(rng, 2, 2);
    OracleConfig oc;
    oc.max_len = 2;
    auto o = rbound_oracle(X, S, oc);
    LowerConfig lc;
    lc.max_len = 2;
    auto l = rbound_lower(X, S, lc);
    EXPECT_LE(l.lower, o.upper * (1 + 1e-12));
    EXPECT_LE(o.lower, l.upper * (1 + 1e-12));
  }
}

TEST(Upper, Examples) {
  const NormedSpace X(3, 1);
  std::vector<Vec> chain(5, Vec{1, -2, 0.5});
  auto [u, m] = rbound_upper(X, chain, true);
  EXPECT_EQ(u, 3.5);
  EXPECT_EQ(m, UpperMethod::telescoping);
  auto [u2, m2] = rbound_upper(NormedSpace(2, 1), std::vector<Vec>{{1, 0}, {0, 1}}, false);
  EXPECT_EQ(u2, 2);
  EXPECT_EQ(m2, UpperMethod::sequence_sum);
  auto [u3, m3] = rbound_upper(NormedSpace(2, 2), std::vector<Vec>{{1, 0}, {0, 2}}, false);
  EXPECT_EQ(u3, 2);
  EXPECT_EQ(m3, UpperMethod::hilbert_exact);
  EXPECT_EQ(method_name(m3), "hilbert-exact");
}

TEST(Upper, TypeTwoAdvisory) {
  std::vector<Vec> S{{3, 4}, {1, 0}};
  auto a = type2_heuristic(NormedSpace(2, 4), S);
  ASSERT_TRUE(a.has_value());
  EXPECT_NEAR(*a, std::sqrt(3.0) * NormedSpace(2, 4).norm(S[0]), 1e-15);
  EXPECT_FALSE(type2_heuristic(NormedSpace(2, 1.5), S).has_value());
  EXPECT_FALSE(type2_heuristic(NormedSpace(2, kInf), S).has_value());
}

// |r(S, sel) - r(S', sel)| <= r(S - S', sel) for matched indices
TEST(RademacherNorm, CertificateTriangle) {
  Rng rng(44);
  for (int t = 0; t < 200; ++t) {
    const std::size_t m = 1 + rng() % 3, d = 1 + rng() % 3;
    const NormedSpace X(d, kPs[rng() % 5]);
    auto S = random_set(rng, m, d), T = random_set(rng, m, d);
    std::vector<Vec> D(m, Vec(d));
    for (std::size_t i = 0; i < m; ++i)
      for (std::size_t j = 0; j < d; ++j) D[i][j] = S[i][j] - T[i][j];
    Selection sel;
    for (int k = 0; k < 3; ++k) sel.indices.push_back(rng() % m), sel.coeffs.push_back(gaussian(rng));
    const double a = rademacher_norm(X, S, sel), b = rademacher_norm(X, T, sel), c = rademacher_norm(X, D, sel);
    EXPECT_LE(std::abs(a - b), c * (1 + 1e-12) + 1e-14);
  }
}

TEST(Estimator, ParseAndDispatch) {
  EXPECT_EQ(parse_estimator("greedy"), EstimatorKind::greedy);
  EXPECT_EQ(parse_estimator("oracle"), EstimatorKind::oracle);
  EXPECT_THROW(parse_estimator("exact"), std::invalid_argument);
  EstimatorConfig c;
  c.kind = EstimatorKind::oracle;
  c.max_len = 2;
  auto e = estimate(NormedSpace(2, 1), std::vector<Vec>{{1, 0}, {0, 1}}, c, 0, {}, false);
  EXPECT_NEAR(e.lower, std::sqrt(2.0), 1e-9);
}
