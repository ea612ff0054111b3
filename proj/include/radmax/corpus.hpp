#pragma once

#include <cmath>
#include <cstdint>
#include <map>
#include <sstream>
#include <stdexcept>
#include <string>
#include <vector>

#include "decomp.hpp"
#include "io.hpp"
#include "rademacher.hpp"
#include "stepfn.hpp"
#include "util.hpp"

namespace radmax {

struct ExperimentConfig {
  std::string experiment;
  std::string space = "lp:2";
  int n = 1;
  int depth = 6;
  int dim = 2;
  EstimatorConfig estimator;
  std::string corpus = "random-gaussian";
  std::size_t corpus_size = 10;
  std::vector<std::string> files;
  std::string measure = "uniform";  // uniform | nondoubling
  bool dyadic = false;              // values on the 2^-16 grid
  std::uint64_t seed = 1;
  std::string out;
  double p = 2;                     // L^p exponent of the measured norms
  std::string weight = "none";      // none | power:<a> | random
  double q = 2;                     // M_q in good-lambda, atom exponent for atoms
  std::vector<double> deltas{0.01, 0.02, 0.05, 0.1, 0.2, 0.3, 0.4, 0.5};
  int family_min = 3, family_max = 12;
  int truncation = 1;               // systems: levels k >= truncation
  int resolution = -1;              // systems: grid resolution M, default depth + 2
  std::string beta = "random";
  std::size_t sandwich_max_len = 3;
};

namespace detail {

inline std::vector<std::string> split_list(const std::string& s, char sep) {
  std::vector<std::string> out;
  std::string cur;
  std::istringstream is(s);
  while (std::getline(is, cur, sep)) {
    auto a = cur.find_first_not_of(" \t"), b = cur.find_last_not_of(" \t");
    if (a != std::string::npos) out.push_back(cur.substr(a, b - a + 1));
  }
  return out;
}

}  // namespace detail

// Keys mirror the long CLI flags with '-' spelled '_'.
inline void apply_config(ExperimentConfig& c, const std::map<std::string, std::string>& kv) {
  for (const auto& [k, v] : kv) {
    try {
      if (k == "experiment") c.experiment = v;
      else if (k == "space") c.space = v;
      else if (k == "n") c.n = std::stoi(v);
      else if (k == "depth" || k == "N") c.depth = std::stoi(v);
      else if (k == "dim" || k == "d") c.dim = std::stoi(v);
      else if (k == "estimator") c.estimator.kind = parse_estimator(v);
      else if (k == "max_len") c.estimator.max_len = std::stoul(v);
      else if (k == "restarts") c.estimator.restarts = std::stoul(v);
      else if (k == "cap") c.estimator.cap = std::stoul(v);
      else if (k == "grid") c.estimator.grid = std::stoi(v);
      else if (k == "corpus") c.corpus = v;
      else if (k == "corpus_size") c.corpus_size = std::stoul(v);
      else if (k == "files") c.files = detail::split_list(v, ',');
      else if (k == "measure") c.measure = v;
      else if (k == "dyadic") c.dyadic = (v == "true" || v == "1");
      else if (k == "seed") c.seed = std::stoull(v);
      else if (k == "out") c.out = v;
      else if (k == "p") c.p = parse_exponent(v);
      else if (k == "weight") c.weight = v;
      else if (k == "q") c.q = parse_real(v);
      else if (k == "deltas") {
        c.deltas.clear();
        for (auto& s : detail::split_list(v, ',')) c.deltas.push_back(parse_real(s));
      } else if (k == "family_min") c.family_min = std::stoi(v);
      else if (k == "family_max") c.family_max = std::stoi(v);
      else if (k == "truncation") c.truncation = std::stoi(v);
      else if (k == "resolution") c.resolution = std::stoi(v);
      else if (k == "beta") c.beta = v;
      else if (k == "sandwich_max_len") c.sandwich_max_len = std::stoul(v);
      else throw std::invalid_argument("unknown config key '" + k + "'");
    } catch (const std::invalid_argument& e) {
      if (std::string(e.what()).find("config key") != std::string::npos) throw;
      throw std::invalid_argument("bad value for config key '" + k + "': " + v);
    } catch (const std::out_of_range&) {
      throw std::invalid_argument("value out of range for config key '" + k + "': " + v);
    }
  }
  c.estimator.seed = c.seed;
}

struct CorpusItem {
  StepFunction f;
  std::string tag;
};

inline double dyadic_round(double x) {
  x = std::clamp(x, -1024.0, 1024.0);
  return std::ldexp(std::nearbyint(std::ldexp(x, 16)), -16);
}

// Power-of-two and zero leaf masses of total 1; far from doubling on purpose.
inline TreePtr nondoubling_tree(int n, int N, Rng& rng) {
  std::vector<double> mass{1.0};
  const std::size_t nc = std::size_t{1} << n;
  for (int k = 0; k < N; ++k) {
    std::vector<double> next;
    for (double m : mass) {
      std::vector<double> share(nc, 0.0);
      if (m > 0) {
        if (n == 1) {
          int pick = static_cast<int>(rng() % 3);
          share = pick == 0 ? std::vector<double>{1, 0} : pick == 1 ? std::vector<double>{0, 1} : std::vector<double>{0.5, 0.5};
        } else {
          std::vector<double> base{0.5, 0.25, 0.125, 0.125};
          if (nc == 4) {
            for (std::size_t i = 3; i > 0; --i) std::swap(base[i], base[rng() % (i + 1)]);
            share = base;
          } else {
            // two random children share the mass
            std::size_t a = rng() % nc, b = (a + 1 + rng() % (nc - 1)) % nc;
            share[a] = 0.5;
            share[b] = 0.5;
          }
        }
      }
      for (double s : share) next.push_back(m * s);
    }
    mass = std::move(next);
  }
  return DyadicTree::with_masses(n, N, std::move(mass));
}

inline TreePtr corpus_tree(const ExperimentConfig& c, Rng& rng) {
  if (c.measure == "uniform") return DyadicTree::lebesgue(c.n, c.depth);
  if (c.measure == "nondoubling") return nondoubling_tree(c.n, c.depth, rng);
  throw std::invalid_argument("measure must be uniform or nondoubling");
}

inline StepFunction random_function(TreePtr t, const NormedSpace& X, Rng& rng, bool dyadic) {
  StepFunction f(std::move(t), X);
  for (auto& x : f.values()) x = dyadic ? dyadic_round(gaussian(rng)) : gaussian(rng);
  return f;
}

inline StepFunction haar_sparse(TreePtr t, const NormedSpace& X, Rng& rng, std::size_t terms) {
  if (t->depth() == 0) return StepFunction(t, X);
  HaarCoeffs H{t, X, Vec(X.dim(), 0.0), {}};
  const unsigned nc = 1u << t->dim();
  H.coeffs.resize(t->depth());
  for (int k = 0; k < t->depth(); ++k) H.coeffs[k].assign(t->cube_count(k) * (nc - 1) * X.dim(), 0.0);
  for (std::size_t s = 0; s < terms; ++s) {
    int k = static_cast<int>(rng() % static_cast<std::uint64_t>(t->depth()));
    Cube q{t->dim(), k, rng() % t->cube_count(k)};
    unsigned th = 1 + static_cast<unsigned>(rng() % (nc - 1));
    for (auto& x : H.at(q, th)) x += gaussian(rng);
  }
  return haar_reconstruct(H);
}

inline StepFunction random_atom(TreePtr t, const NormedSpace& X, Rng& rng, double qexp) {
  if (t->depth() == 0) throw std::invalid_argument("atoms need depth >= 1");
  int k = static_cast<int>(rng() % static_cast<std::uint64_t>(t->depth()));
  Cube q{t->dim(), k, rng() % t->cube_count(k)};
  auto [lo, hi] = t->leaf_range(q);
  const std::size_t d = X.dim();
  std::vector<double> v((hi - lo) * d);
  for (auto& x : v) x = gaussian(rng);
  for (std::size_t j = 0; j < d; ++j) {
    double s = 0;
    for (std::size_t l = 0; l < hi - lo; ++l) s += v[l * d + j];
    s /= static_cast<double>(hi - lo);
    for (std::size_t l = 0; l < hi - lo; ++l) v[l * d + j] -= s;
  }
  const double size = local_lq(*t, X, q, v, qexp) / atom_bound(q, qexp);
  StepFunction f(t, X);
  for (std::size_t i = 0; i < v.size(); ++i) f.values()[lo * d + i] = size > 0 ? v[i] / size : 0.0;
  return f;
}

// f(leaf l) = e_l in l^1 of dimension 2^{m-1} on the depth m-1 line: the chain of the
// first leaf carries the normalized partial sums 2^{-i} (e_0 + ... + e_{2^i - 1}).
inline StepFunction l1_partial_sum(int m) {
  if (m < 1 || m > 13) throw std::invalid_argument("family depth m must be in 1..13");
  const int N = m - 1;
  auto t = DyadicTree::lebesgue(1, N);
  const std::size_t d = t->leaf_count();
  StepFunction f(t, NormedSpace(d, 1.0));
  for (std::size_t l = 0; l < d; ++l) f.value(l)[l] = 1.0;
  return f;
}

inline std::vector<CorpusItem> gen_corpus(const ExperimentConfig& c) {
  std::vector<CorpusItem> out;
  if (c.corpus == "files") {
    for (const auto& path : c.files) out.push_back({read_rmx_file(path), "file:" + path});
    return out;
  }
  if (c.corpus == "l1-partial-sum") {
    for (int m = c.family_min; m <= c.family_max; ++m) out.push_back({l1_partial_sum(m), "l1-partial-sum:m=" + std::to_string(m)});
    return out;
  }
  const NormedSpace X = parse_space(c.space, static_cast<std::size_t>(c.dim));
  for (std::size_t i = 0; i < c.corpus_size; ++i) {
    Rng rng(derive_seed(c.seed, i));
    TreePtr t = corpus_tree(c, rng);
    std::string tag = c.corpus + ":" + std::to_string(i);
    if (c.corpus == "random-gaussian") {
      out.push_back({random_function(t, X, rng, c.dyadic), tag});
    } else if (c.corpus == "haar-sparse") {
      out.push_back({haar_sparse(t, X, rng, 1 + rng() % 4), tag});
    } else if (c.corpus == "atoms") {
      out.push_back({random_atom(t, X, rng, c.q), tag});
    } else if (c.corpus == "constants") {
      Vec xi(X.dim());
      for (auto& x : xi) x = gaussian(rng);
      out.push_back({StepFunction::constant(t, X, xi), tag});
    } else {
      throw std::invalid_argument("unknown corpus generator '" + c.corpus + "'");
    }
  }
  return out;
}

}  // namespace radmax
