#include <gtest/gtest.h>

#include <sstream>

#include "radmax/experiments.hpp"

using namespace radmax;

namespace {

StepFunction round_trip(const StepFunction& f) {
  std::stringstream ss;
  write_rmx(ss, f);
  return read_rmx(ss);
}

StepFunction parse(const std::string& s) {
  std::istringstream is(s);
  return read_rmx(is);
}

}  // namespace

TEST(Rmx, RoundTripUniform) {
  for (std::uint64_t s = 0; s < 10; ++s) {
    Rng rng(s);
    const NormedSpace X(1 + s % 3, s % 2 ? 1.5 : kInf);
    auto f = random_function(DyadicTree::lebesgue(1 + s % 3, 2), X, rng, false);
    auto g = round_trip(f);
    EXPECT_EQ(g.values(), f.values());
    EXPECT_TRUE(g.tree()->is_uniform());
    EXPECT_EQ(g.space().literal(), X.literal());
  }
}

TEST(Rmx, RoundTripLeafMass) {
  Rng rng(3);
  auto t = nondoubling_tree(2, 2, rng);
  auto f = random_function(t, NormedSpace(2, 1), rng, false);
  auto g = round_trip(f);
  EXPECT_EQ(g.values(), f.values());
  EXPECT_EQ(g.tree()->leaf_masses(), t->leaf_masses());
}

TEST(Rmx, ParsesHandWritten) {
  auto f = parse("RADMAX v1\n\nn=1 N=1 d=2 norm=lp:1 measure=uniform\nvalues\n1 2\r\n-0.5 1.25e-1\n");
  EXPECT_EQ(f.values(), (std::vector<double>{1, 2, -0.5, 0.125}));
  EXPECT_EQ(f.space().literal(), "lp:1");
  EXPECT_THROW(parse("RADMAX v1\nn=1 N=1 d=1 norm=lp:1 measure=uniform\nvalues\n1\ninf\n"), std::invalid_argument);
}

TEST(Rmx, FormatErrors) {
  const std::string head = "RADMAX v1\nn=1 N=1 d=1 norm=lp:2 measure=uniform\nvalues\n";
  EXPECT_THROW(parse("RADMAX v2\n"), FormatError);
  EXPECT_THROW(parse(""), FormatError);
  EXPECT_THROW(parse("RADMAX v1\nn=1 N=1 d=1 measure=uniform\nvalues\n1\n2\n"), FormatError);
  EXPECT_THROW(parse("RADMAX v1\nn=1 N=1 d=1 norm=lp:2 measure=weird\nvalues\n1\n2\n"), FormatError);
  EXPECT_THROW(parse("RADMAX v1\nn=x N=1 d=1 norm=lp:2 measure=uniform\nvalues\n1\n2\n"), FormatError);
  EXPECT_THROW(parse(head + "1\n"), FormatError);
  EXPECT_THROW(parse(head + "1\n2\n3\n"), FormatError);
  EXPECT_THROW(parse(head + "1 2\n3\n"), FormatError);
  EXPECT_THROW(parse("RADMAX v1\nn=1 N=1 d=1 norm=lp:2 measure=leafmass\nvalues\n1\n2\n"), FormatError);
  EXPECT_THROW(parse("RADMAX v1\nn=1 N=1 d=1 norm=lp:2 measure=uniform\nmass 0.5 0.5\nvalues\n1\n2\n"), FormatError);
  EXPECT_THROW(parse("RADMAX v1\nn=1 N=1 d=1 norm=lp:2 measure=leafmass\nmass 0.5\nvalues\n1\n2\n"), FormatError);
  EXPECT_THROW(parse("RADMAX v1\nn=1 N=1 d=1 norm=lp:0.5 measure=uniform\nvalues\n1\n2\n"), std::invalid_argument);
  EXPECT_THROW(parse(head + "abc\n2\n"), std::invalid_argument);
}

TEST(Rmx, ErrorNamesLine) {
  try {
    parse("RADMAX v1\nn=1 N=1 d=1 norm=lp:2 measure=uniform\nvalues\n1\n2 3\n");
    FAIL();
  } catch (const FormatError& e) {
    EXPECT_NE(std::string(e.what()).find("line 5"), std::string::npos) << e.what();
  }
}

TEST(Config, Parse) {
  std::istringstream is("# comment\nexperiment = opnorm\n  space=lp:1   # trailing\n\nmax_len = 5\n");
  auto kv = parse_config(is);
  EXPECT_EQ(kv.size(), 3u);
  EXPECT_EQ(kv["space"], "lp:1");
  ExperimentConfig c;
  apply_config(c, kv);
  EXPECT_EQ(c.experiment, "opnorm");
  EXPECT_EQ(c.estimator.max_len, 5u);
  std::istringstream bad("novalue\n");
  EXPECT_THROW(parse_config(bad), FormatError);
  std::istringstream empty_key(" = 3\n");
  EXPECT_THROW(parse_config(empty_key), FormatError);
}

TEST(Config, ApplyErrors) {
  ExperimentConfig c;
  EXPECT_THROW(apply_config(c, {{"nonsense", "1"}}), std::invalid_argument);
  EXPECT_THROW(apply_config(c, {{"depth", "deep"}}), std::invalid_argument);
  EXPECT_THROW(apply_config(c, {{"estimator", "magic"}}), std::invalid_argument);
  apply_config(c, {{"seed", "42"}, {"deltas", "0.1, 0.2"}, {"files", "a.rmx,b.rmx"}});
  EXPECT_EQ(c.estimator.seed, 42u);
  EXPECT_EQ(c.deltas, (std::vector<double>{0.1, 0.2}));
  EXPECT_EQ(c.files.size(), 2u);
}

TEST(Csv, QuotingAndStatement) {
  Csv csv("a statement, with comma", {"x", "label"});
  csv.add(1.5, std::string("plain"));
  csv.add(2, std::string("needs, \"quotes\""));
  EXPECT_EQ(csv.str(), "# statement: a statement, with comma\nx,label\n1.5,plain\n2,\"needs, \"\"quotes\"\"\"\n");
  EXPECT_THROW(csv.add(1), std::logic_error);
}
