#include <gtest/gtest.h>

#include "radmax/experiments.hpp"

using namespace radmax;

namespace {

ExperimentConfig small(const std::string& name, const std::string& space = "lp:1") {
  ExperimentConfig c;
  c.experiment = name;
  c.space = space;
  c.dim = 2;
  c.depth = 3;
  c.corpus_size = 4;
  c.estimator.max_len = 4;
  c.estimator.restarts = 2;
  return c;
}

}  // namespace

TEST(Corpus, Deterministic) {
  for (auto gen : {"random-gaussian", "haar-sparse", "atoms", "constants"}) {
    auto c = small("opnorm");
    c.corpus = gen;
    c.measure = "nondoubling";
    auto a = gen_corpus(c), b = gen_corpus(c);
    ASSERT_EQ(a.size(), 4u);
    for (std::size_t i = 0; i < a.size(); ++i) {
      EXPECT_EQ(a[i].f.values(), b[i].f.values());
      EXPECT_EQ(a[i].f.tree()->leaf_masses(), b[i].f.tree()->leaf_masses());
      EXPECT_EQ(a[i].tag, b[i].tag);
    }
  }
  auto c = small("opnorm");
  c.corpus = "nonsense";
  EXPECT_THROW(gen_corpus(c), std::invalid_argument);
}

TEST(Corpus, AtomsPassAtomTests) {
  auto c = small("opnorm");
  c.corpus = "atoms";
  c.corpus_size = 20;
  for (double q : {1.5, 2.0, kInf}) {
    c.q = q;
    for (auto& it : gen_corpus(c)) {
      const auto& t = *it.f.tree();
      Cube support = Cube::root(t.dim());
      bool found = false;
      for (int k = t.depth(); k >= 0 && !found; --k)
        for (std::size_t m = 0; m < t.cube_count(k) && !found; ++m) {
          Cube Q{t.dim(), k, m};
          auto [lo, hi] = t.leaf_range(Q);
          bool outside_zero = true;
          for (std::size_t l = 0; l < t.leaf_count(); ++l)
            if ((l < lo || l >= hi) && it.f.norm_at(l) != 0) outside_zero = false;
          if (outside_zero) support = Q, found = true;
        }
      ASSERT_TRUE(found);
      EXPECT_LE(it.f.space().norm(average(it.f, support)), 1e-12);
      auto [lo, hi] = t.leaf_range(support);
      std::vector<double> v(it.f.values().begin() + lo * it.f.dim(), it.f.values().begin() + hi * it.f.dim());
      EXPECT_LE(local_lq(t, it.f.space(), support, v, q), atom_bound(support, q) * (1 + 1e-12));
    }
  }
}

TEST(Corpus, L1PartialSumChain) {
  auto f = l1_partial_sum(4);
  EXPECT_EQ(f.dim(), 8u);
  const auto& t = *f.tree();
  auto chain = t.chain(0);
  for (std::size_t i = 0; i < chain.size(); ++i) {
    auto a = average(f, chain[i]);
    const std::size_t width = std::size_t{1} << (t.depth() - chain[i].level);
    for (std::size_t j = 0; j < 8; ++j) EXPECT_EQ(a[j], j < width ? 1.0 / width : 0.0);
  }
  EXPECT_THROW(l1_partial_sum(0), std::invalid_argument);
  EXPECT_THROW(l1_partial_sum(14), std::invalid_argument);
}

TEST(Opnorm, ConstantsGiveRatioOne) {
  for (double p : {1.0, 2.0, 4.0}) {
    auto c = small("opnorm", "lp:1.5");
    c.corpus = "constants";
    c.p = p;
    auto r = run_experiment(c);
    EXPECT_NEAR(r.summary.at("sup_ratio_lower"), 1, 1e-12);
    EXPECT_NEAR(r.summary.at("sup_ratio_upper"), 1, 1e-12);
  }
}

TEST(Opnorm, HilbertColumnsAgree) {
  auto c = small("opnorm", "lp:2");
  c.depth = 5;
  auto r = run_experiment(c);
  EXPECT_NEAR(r.summary.at("sup_ratio_lower"), r.summary.at("sup_ratio_dyadic_max"), 1e-6);
  EXPECT_NEAR(r.summary.at("sup_ratio_upper"), r.summary.at("sup_ratio_dyadic_max"), 1e-6);
}

TEST(Opnorm, SmallFamilyNondecreasing) {
  auto c = small("opnorm");
  c.corpus = "l1-partial-sum";
  c.family_min = 2;
  c.family_max = 6;
  c.p = 1;
  auto r = run_experiment(c);
  EXPECT_EQ(r.summary.at("nondecreasing"), 1);
  EXPECT_EQ(r.csv.rfind("# statement: ", 0), 0u);
}

TEST(WeakType, ConstantsGiveOne) {
  auto c = small("weak-type");
  c.corpus = "constants";
  auto r = run_experiment(c);
  EXPECT_NEAR(r.summary.at("sup_ratio_l1"), 1, 1e-12);
}

TEST(WeakType, AtomsFinite) {
  auto c = small("weak-type", "lp:2");
  c.corpus = "atoms";
  auto r = run_experiment(c);
  EXPECT_TRUE(std::isfinite(r.summary.at("sup_ratio_l1")));
  EXPECT_TRUE(std::isfinite(r.summary.at("sup_ratio_h1")));
  EXPECT_EQ(r.summary.at("h1_violations"), 0);
}

TEST(GoodLambdaExperiment, ContainmentAndFinite) {
  auto c = small("good-lambda", "lp:2");
  c.depth = 5;
  c.deltas = {0.05, 0.5};
  auto r = run_experiment(c);
  EXPECT_EQ(r.summary.at("containment_violations"), 0);
  EXPECT_EQ(r.summary.at("constants_finite"), 1);
  EXPECT_GT(r.summary.at("lambda_count"), 0);
}

TEST(Bmo, ConstantsSkipped) {
  auto c = small("bmo");
  c.corpus = "constants";
  auto r = run_experiment(c);
  EXPECT_NE(r.csv.find("skipped"), std::string::npos);
  EXPECT_EQ(r.csv.find("measured"), std::string::npos);
}

TEST(Bmo, HaarSparseSandwich) {
  auto c = small("bmo", "lp:2");
  c.corpus = "haar-sparse";
  auto r = run_experiment(c);
  EXPECT_TRUE(std::isfinite(r.summary.at("sup_ratio")));
  EXPECT_GT(r.summary.at("sandwich_checks"), 0);
  EXPECT_EQ(r.summary.at("sandwich_lower_violations"), 0);
  EXPECT_EQ(r.summary.at("sandwich_upper_violations"), 0);
}

TEST(Transfer, IdentityInDimensionOne) {
  auto c = small("transfer");
  c.n = 1;
  auto r = run_experiment(c);
  EXPECT_EQ(r.summary.at("average_slack"), 0);
  EXPECT_EQ(r.summary.at("norm_slack"), 0);
  EXPECT_GE(r.summary.at("worst_rmf_margin"), 0);
  EXPECT_EQ(interleave_order_violations(3, 3), 0u);
}

TEST(Transfer, HilbertCaseExact) {
  auto c = small("transfer", "lp:2");
  c.n = 2;
  auto r = run_experiment(c);
  EXPECT_LE(r.summary.at("average_slack"), 1e-12);
  EXPECT_GE(r.summary.at("worst_rmf_margin"), -1e-9);
}

TEST(Systems, ZeroAndSingleShift) {
  for (auto beta : {"zero", "4:1", "3:1;5:1"}) {
    auto c = small("systems", "lp:2");
    c.depth = 2;
    c.truncation = 2;
    c.resolution = 5;
    c.corpus_size = 2;
    c.beta = beta;
    auto r = run_experiment(c);
    EXPECT_EQ(r.summary.at("identity_mismatches"), 0) << beta;
    EXPECT_EQ(r.summary.at("composition_mismatches"), 0) << beta;
    EXPECT_LE(r.summary.at("rmf_max_diff"), 1e-9) << beta;
  }
}

TEST(Paraproduct, IdentityHolds) {
  auto c = small("paraproduct", "lp:2");
  auto r = run_experiment(c);
  EXPECT_LE(r.summary.at("identity_slack"), 1e-12);
  EXPECT_TRUE(std::isfinite(r.summary.at("sup_ratio")));
}

TEST(Experiment, UnknownNameAndDeterminism) {
  auto c = small("nonsense");
  EXPECT_THROW(run_experiment(c), std::invalid_argument);
  auto a = run_experiment(small("opnorm")), b = run_experiment(small("opnorm"));
  EXPECT_EQ(a.csv, b.csv);
}
