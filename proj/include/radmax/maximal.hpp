#pragma once

#include <algorithm>
#include <cmath>
#include <functional>
#include <string>
#include <vector>

#include "rademacher.hpp"
#include "stepfn.hpp"

namespace radmax {

// Mf(x) = sup_{Q containing x} |<f>_Q|
inline StepFunction dyadic_maximal(const StepFunction& f, int min_level = 0, const AverageTable* table = nullptr) {
  const auto& t = *f.tree();
  std::optional<AverageTable> own;
  if (!table) table = &own.emplace(f);
  std::vector<std::vector<double>> nrm(t.depth() + 1);
  for (int k = min_level; k <= t.depth(); ++k) {
    nrm[k].resize(t.cube_count(k));
    for (std::size_t q = 0; q < t.cube_count(k); ++q) {
      auto a = table->at(k, q);
      nrm[k][q] = f.space().norm_raw(a.data(), a.size());
    }
  }
  StepFunction out(f.tree(), NormedSpace::scalar());
  for (std::size_t l = 0; l < t.leaf_count(); ++l) {
    double m = 0;
    for (int k = min_level; k <= t.depth(); ++k) m = std::max(m, nrm[k][t.cube_of(l, k)]);
    out.values()[l] = m;
  }
  return out;
}

// M_q f(x) = sup_{Q containing x} <|f|^q>_Q^{1/q}
inline StepFunction power_maximal(const StepFunction& f, double q) {
  if (!(q >= 1) || std::isinf(q)) throw std::invalid_argument("M_q needs 1 <= q < inf");
  std::vector<double> pw(f.leaf_count());
  for (std::size_t l = 0; l < f.leaf_count(); ++l) {
    double a = f.norm_at(l);
    pw[l] = q == 1 ? a : q == 2 ? a * a : std::pow(a, q);
  }
  auto g = StepFunction::scalar(f.tree(), std::move(pw));
  auto M = dyadic_maximal(g);
  for (auto& x : M.values()) x = q == 1 ? x : q == 2 ? std::sqrt(x) : std::pow(x, 1.0 / q);
  return M;
}

inline double h1_norm(const StepFunction& f) { return lp_norm(dyadic_maximal(f), 1); }

struct MaxField {
  TreePtr tree;
  int min_level = 0;
  std::vector<double> lower, upper, dyadic_max;
  std::vector<RadEstimate> estimates;
  std::string fingerprint;

  StepFunction lower_fn() const { return StepFunction::scalar(tree, lower); }
  StepFunction upper_fn() const { return StepFunction::scalar(tree, upper); }
};

// Chain averages at a leaf, root first, levels >= min_level.
inline std::vector<Vec> chain_averages(const AverageTable& table, const DyadicTree& t, std::size_t leaf,
                                       int min_level = 0, int max_level = -1) {
  if (max_level < 0) max_level = t.depth();
  std::vector<Vec> S;
  for (int k = min_level; k <= max_level; ++k) {
    auto a = table.at(k, t.cube_of(leaf, k));
    S.emplace_back(a.begin(), a.end());
  }
  return S;
}

struct RmfOptions {
  int min_level = 0;
  bool keep_estimates = false;
  std::function<std::vector<Selection>(std::size_t leaf)> warm;
};

inline MaxField rmf(const StepFunction& f, const EstimatorConfig& cfg, const RmfOptions& opt = {}) {
  const auto& t = *f.tree();
  if (opt.min_level < 0 || opt.min_level > t.depth()) throw std::out_of_range("min_level out of range");
  AverageTable table(f);
  MaxField out;
  out.tree = f.tree();
  out.min_level = opt.min_level;
  out.fingerprint = cfg.fingerprint() + ";min_level=" + std::to_string(opt.min_level);
  auto M = dyadic_maximal(f, opt.min_level, &table);
  out.dyadic_max = M.values();
  out.lower.resize(t.leaf_count());
  out.upper.resize(t.leaf_count());
  for (std::size_t l = 0; l < t.leaf_count(); ++l) {
    auto S = chain_averages(table, t, l, opt.min_level);
    std::vector<Selection> warm;
    if (opt.warm) warm = opt.warm(l);
    auto est = estimate(f.space(), S, cfg, cfg.seed ^ l, std::move(warm), true);
    out.lower[l] = est.lower;
    out.upper[l] = est.upper;
    if (opt.keep_estimates) out.estimates.push_back(std::move(est));
  }
  return out;
}

// Certified upper side only (sequence-sum / telescoping / hilbert-exact).
inline std::vector<double> rmf_upper(const StepFunction& f, int min_level = 0) {
  const auto& t = *f.tree();
  AverageTable table(f);
  std::vector<double> up(t.leaf_count());
  for (std::size_t l = 0; l < t.leaf_count(); ++l)
    up[l] = rbound_upper(f.space(), chain_averages(table, t, l, min_level), true).first;
  return up;
}

// Sf(x) = (E|sum_{Q,theta} eps h_Q^theta(x) <f,h_Q^theta>|^2)^{1/2}
inline MaxField square_function(const StepFunction& f, const EstimatorConfig& cfg) {
  const auto& t = *f.tree();
  auto H = haar_decompose(f);
  const NormedSpace& X = f.space();
  const int n = t.dim();
  const unsigned nc = 1u << n;
  MaxField out;
  out.tree = f.tree();
  out.fingerprint = "square;" + cfg.fingerprint();
  out.lower.resize(t.leaf_count());
  out.upper.resize(t.leaf_count());
  out.dyadic_max = dyadic_maximal(f).values();
  for (std::size_t l = 0; l < t.leaf_count(); ++l) {
    std::vector<Vec> terms;
    std::vector<double> norms;
    for (int k = 0; k < t.depth(); ++k) {
      Cube q{n, k, t.cube_of(l, k)};
      for (unsigned th = 1; th < nc; ++th) {
        double h = haar_value(t, q, th, l);
        auto c = H.at(q, th);
        Vec v(c.begin(), c.end());
        bool zero = true;
        for (auto& x : v) zero = zero && (x *= h) == 0;
        if (zero) continue;
        norms.push_back(X.norm_raw(v.data(), v.size()));
        terms.push_back(std::move(v));
      }
    }
    if (terms.empty()) continue;
    if (terms.size() <= cfg.cap) {
      std::vector<double> ones(terms.size(), 1.0);
      out.lower[l] = out.upper[l] = rademacher_norm(X, terms, ones, cfg.cap);
    } else if (X.is_hilbert()) {
      double s = 0;
      for (double a : norms) s += a * a;
      out.lower[l] = out.upper[l] = std::sqrt(s);
    } else {
      // the cap largest terms bound from below (conditional Jensen); triangle above
      std::vector<std::size_t> ord(terms.size());
      for (std::size_t i = 0; i < ord.size(); ++i) ord[i] = i;
      std::stable_sort(ord.begin(), ord.end(), [&](auto a, auto b) { return norms[a] > norms[b]; });
      std::sort(ord.begin(), ord.begin() + cfg.cap);
      std::vector<Vec> top;
      for (std::size_t i = 0; i < cfg.cap; ++i) top.push_back(terms[ord[i]]);
      std::vector<double> ones(top.size(), 1.0);
      out.lower[l] = rademacher_norm(X, top, ones, cfg.cap);
      double s = 0;
      for (double a : norms) s += a;
      out.upper[l] = s;
    }
  }
  return out;
}

// Pi_b f = sum_{Q,theta} <f>_Q <b,h_Q^theta> h_Q^theta
inline StepFunction paraproduct(const StepFunction& b, const StepFunction& f) {
  if (b.dim() != 1) throw std::invalid_argument("paraproduct symbol must be scalar");
  b.check_same(StepFunction(f.tree(), NormedSpace::scalar()));
  const auto& t = *f.tree();
  auto Hb = haar_decompose(b);
  AverageTable table(f);
  HaarCoeffs out{f.tree(), f.space(), Vec(f.dim(), 0.0), {}};
  const int n = t.dim();
  const unsigned nc = 1u << n;
  out.coeffs.resize(t.depth());
  for (int k = 0; k < t.depth(); ++k) {
    out.coeffs[k].assign(t.cube_count(k) * (nc - 1) * f.dim(), 0.0);
    for (std::size_t qi = 0; qi < t.cube_count(k); ++qi) {
      Cube q{n, k, qi};
      auto a = table.at(k, qi);
      for (unsigned th = 1; th < nc; ++th) {
        const double c = Hb.at(q, th)[0];
        auto o = out.at(q, th);
        for (std::size_t j = 0; j < a.size(); ++j) o[j] = a[j] * c;
      }
    }
  }
  return haar_reconstruct(out);
}

// Certificate-level check of 0 <= M f(x) - c_Q <= M((f - <f>_Q)1_Q)(x) for all cubes Q and leaves x in Q.
// c_Q is the estimate over the ancestors of Q; leaf and cube estimates are warm-started from each other
// until neither improves, so both inequalities compare exactly evaluated witnesses.
struct SandwichReport {
  std::size_t checks = 0;
  std::size_t lower_violations = 0;
  std::size_t upper_violations = 0;
  double worst_lower_margin = kInf;  // min over (x,Q) of lower(x) - c_Q
  double worst_upper_margin = kInf;  // min over (x,Q) of upper_loc(x) - (lower(x) - c_Q)
  std::size_t rounds = 0;
  std::vector<double> leaf_lower;
};

inline SandwichReport bmo_sandwich(const StepFunction& f, const EstimatorConfig& cfg, double slack = 1e-12) {
  const auto& t = *f.tree();
  const NormedSpace& X = f.space();
  const int N = t.depth(), n = t.dim();
  AverageTable table(f);
  const std::size_t L = t.leaf_count();
  std::vector<std::vector<Vec>> leafS(L);
  std::vector<RadEstimate> leafE(L);
  for (std::size_t l = 0; l < L; ++l) {
    leafS[l] = chain_averages(table, t, l);
    leafE[l] = estimate(X, leafS[l], cfg, cfg.seed ^ l, {}, true);
  }
  // cubes of level < N; leaves are their own ancestor sets
  std::vector<std::vector<RadEstimate>> cubeE(N);
  std::vector<std::vector<std::vector<Vec>>> cubeS(N);
  for (int k = 0; k < N; ++k) {
    cubeE[k].resize(t.cube_count(k));
    cubeS[k].resize(t.cube_count(k));
    for (std::size_t q = 0; q < t.cube_count(k); ++q) {
      auto [lo, hi] = t.leaf_range({n, k, q});
      cubeS[k][q] = chain_averages(table, t, lo, 0, k);
      cubeE[k][q] = estimate(X, cubeS[k][q], cfg, derive_seed(cfg.seed, (std::uint64_t(k) << 40) | q), {}, true);
      (void)hi;
    }
  }
  auto improve = [&](RadEstimate& e, const std::vector<Vec>& S, const Selection& w) {
    double v = rademacher_norm(X, S, w, cfg.cap);
    if (v > e.lower) {
      e.lower = v;
      e.lower_witness = w;
      return true;
    }
    return false;
  };
  SandwichReport rep;
  for (bool changed = true; changed && rep.rounds < 50; ++rep.rounds) {
    changed = false;
    for (std::size_t l = 0; l < L; ++l)
      for (int k = 0; k < N; ++k) changed |= improve(leafE[l], leafS[l], cubeE[k][t.cube_of(l, k)].lower_witness);
    for (int k = 0; k < N; ++k)
      for (std::size_t q = 0; q < t.cube_count(k); ++q) {
        auto [lo, hi] = t.leaf_range({n, k, q});
        for (std::size_t l = lo; l < hi; ++l) {
          Selection w = leafE[l].lower_witness;
          for (auto& i : w.indices) i = std::min<std::size_t>(i, k);
          changed |= improve(cubeE[k][q], cubeS[k][q], w);
        }
      }
  }
  rep.leaf_lower.resize(L);
  for (std::size_t l = 0; l < L; ++l) rep.leaf_lower[l] = leafE[l].lower;
  for (int k = 0; k <= N; ++k)
    for (std::size_t q = 0; q < t.cube_count(k); ++q) {
      Cube Q{n, k, q};
      auto up = rmf_upper(localize(f, Q));
      auto [lo, hi] = t.leaf_range(Q);
      const double cQ = k < N ? cubeE[k][q].lower : leafE[q].lower;
      for (std::size_t l = lo; l < hi; ++l) {
        ++rep.checks;
        const double lm = leafE[l].lower - cQ;
        const double um = up[l] - lm;
        rep.worst_lower_margin = std::min(rep.worst_lower_margin, lm);
        rep.worst_upper_margin = std::min(rep.worst_upper_margin, um);
        if (lm + slack < 0) ++rep.lower_violations;
        if (um + slack < 0) ++rep.upper_violations;
      }
    }
  return rep;
}

}  // namespace radmax
