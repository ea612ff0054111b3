#pragma once

#include <climits>
#include <cmath>
#include <stdexcept>
#include <string>
#include <vector>

#include "maximal.hpp"
#include "stepfn.hpp"

namespace radmax {

// <|f|>_Q for every cube
inline AverageTable norm_average_table(const StepFunction& f) {
  std::vector<double> a(f.leaf_count());
  for (std::size_t l = 0; l < f.leaf_count(); ++l) a[l] = f.norm_at(l);
  return AverageTable(StepFunction::scalar(f.tree(), std::move(a)));
}

struct BadPart {
  Cube cube;
  std::vector<double> values;  // on the leaves of cube, Morton order
};

struct CZResult {
  double height = 0;
  std::vector<Cube> stopping;
  StepFunction good;
  std::vector<BadPart> bad;

  StepFunction bad_function(std::size_t i) const {
    StepFunction b(good.tree(), good.space());
    auto [lo, hi] = good.tree()->leaf_range(bad[i].cube);
    std::copy(bad[i].values.begin(), bad[i].values.end(), b.values().begin() + lo * good.dim());
    (void)hi;
    return b;
  }
  StepFunction bad_sum() const {
    StepFunction b(good.tree(), good.space());
    for (const auto& part : bad) {
      auto [lo, hi] = good.tree()->leaf_range(part.cube);
      for (std::size_t i = 0; i < (hi - lo) * good.dim(); ++i) b.values()[lo * good.dim() + i] += part.values[i];
    }
    return b;
  }
};

inline CZResult calderon_zygmund(const StepFunction& f, double lambda, int min_level = 0) {
  if (!(lambda > 0) || std::isinf(lambda)) throw std::invalid_argument("CZ height must be positive and finite");
  const auto& t = *f.tree();
  auto nt = norm_average_table(f);
  CZResult r{lambda, {}, f, {}};
  r.stopping = t.maximal_cubes([&](const Cube& q) { return nt.at(q)[0] > lambda; }, min_level);
  const std::size_t d = f.dim();
  for (const auto& q : r.stopping) {
    Vec c = average(f, q);
    auto [lo, hi] = t.leaf_range(q);
    BadPart b{q, std::vector<double>((hi - lo) * d)};
    for (std::size_t l = lo; l < hi; ++l)
      for (std::size_t j = 0; j < d; ++j) {
        b.values[(l - lo) * d + j] = f.value(l)[j] - c[j];
        r.good.value(l)[j] = c[j];
      }
    r.bad.push_back(std::move(b));
  }
  return r;
}

inline double union_mass(const DyadicTree& t, const std::vector<Cube>& cubes) {
  double s = 0;
  for (const auto& q : cubes) s += t.mass(q);
  return s;
}

inline constexpr int kNever = INT_MAX;

struct GundyResult {
  double height = 0;
  int min_level = 0;
  StepFunction good, jump, bad;
  std::vector<int> tau;  // kNever where no stopping
};

inline GundyResult gundy(const StepFunction& f, double lambda, int N0) {
  if (!(lambda > 0) || std::isinf(lambda)) throw std::invalid_argument("Gundy height must be positive and finite");
  const auto& t = *f.tree();
  const int N = t.depth();
  if (N0 < 0 || N0 > N) throw std::out_of_range("N0 out of range");
  AverageTable table(f);
  const std::size_t d = f.dim();
  const NormedSpace& X = f.space();
  GundyResult r{lambda, N0, StepFunction(f.tree(), X), StepFunction(f.tree(), X), StepFunction(f.tree(), X),
                std::vector<int>(t.leaf_count(), kNever)};
  auto Ak = [&](std::size_t l, int k) -> std::span<const double> {
    return k == N ? f.value(l) : table.at(k, t.cube_of(l, k));
  };
  Vec jump(d);
  for (std::size_t l = 0; l < t.leaf_count(); ++l) {
    int tau = kNever;
    for (int k = N0; k <= N; ++k) {
      auto a = Ak(l, k);
      if (X.norm_raw(a.data(), d) > lambda) {
        tau = k;
        break;
      }
    }
    r.tau[l] = tau;
    const int stop = std::min(tau, N);
    auto fs = Ak(l, stop);
    for (std::size_t j = 0; j < d; ++j) r.bad.value(l)[j] = f.value(l)[j] - fs[j];
    if (tau != kNever) {
      auto a = Ak(l, tau);
      for (std::size_t j = 0; j < d; ++j) jump[j] = tau == N0 ? a[j] : a[j] - Ak(l, tau - 1)[j];
      if (X.norm_raw(jump.data(), d) > 2 * lambda)
        std::copy(jump.begin(), jump.end(), r.jump.value(l).begin());
    }
    for (std::size_t j = 0; j < d; ++j) r.good.value(l)[j] = f.value(l)[j] - r.bad.value(l)[j] - r.jump.value(l)[j];
  }
  return r;
}

// |A_{N0} h|_1 + sum_{k=N0}^{N-1} |A_{k+1} h - A_k h|_1
inline double martingale_variation(const StepFunction& h, int N0) {
  auto md = martingale_decompose(h, N0);
  double s = 0;
  for (const auto& term : md.terms) s += lp_norm(term, 1);
  return s;
}

struct Atom {
  double scale = 0;
  Cube cube;
  int height = 0;              // j with stopping height 2^j
  std::vector<double> values;  // on the leaves of cube
};

struct AtomicDecomp {
  double q = 2;
  TreePtr tree;
  NormedSpace space;
  std::vector<Atom> atoms;
  Vec residual;  // the constant left at the lowest height, <f>_root

  StepFunction atom_function(std::size_t i) const {
    StepFunction a(tree, space);
    auto [lo, hi] = tree->leaf_range(atoms[i].cube);
    std::copy(atoms[i].values.begin(), atoms[i].values.end(), a.values().begin() + lo * space.dim());
    (void)hi;
    return a;
  }
  StepFunction reconstruct() const {
    StepFunction out = StepFunction::constant(tree, space, residual);
    for (const auto& at : atoms) {
      auto [lo, hi] = tree->leaf_range(at.cube);
      for (std::size_t i = 0; i < (hi - lo) * space.dim(); ++i)
        out.values()[lo * space.dim() + i] += at.scale * at.values[i];
    }
    return out;
  }
  double coefficient_sum() const {
    double s = 0;
    for (const auto& a : atoms) s += std::abs(a.scale);
    return s;
  }
};

// |Q|^{-1/q'}
inline double atom_bound(const Cube& q, double qexp) {
  const double inv_qp = std::isinf(qexp) ? 1.0 : 1.0 - 1.0 / qexp;
  return std::pow(q.volume(), -inv_qp);
}

inline double local_lq(const DyadicTree& t, const NormedSpace& X, const Cube& q, const std::vector<double>& v,
                       double qexp) {
  auto [lo, hi] = t.leaf_range(q);
  const auto& m = t.leaf_masses();
  const std::size_t d = X.dim();
  double s = 0;
  for (std::size_t l = lo; l < hi; ++l) {
    double a = X.norm_raw(v.data() + (l - lo) * d, d);
    if (std::isinf(qexp)) {
      if (m[l] > 0) s = std::max(s, a);
    } else {
      s += m[l] * std::pow(a, qexp);
    }
  }
  return std::isinf(qexp) ? s : std::pow(s, 1.0 / qexp);
}

struct AtomCheck {
  bool support = true;
  double mean_slack = 0;  // |integral of a|
  double norm_ratio = 0;  // |a|_q / |Q|^{-1/q'}
};

inline AtomCheck check_atom(const AtomicDecomp& D, std::size_t i) {
  const auto& at = D.atoms[i];
  const auto& t = *D.tree;
  AtomCheck c;
  auto [lo, hi] = t.leaf_range(at.cube);
  c.support = at.values.size() == (hi - lo) * D.space.dim();
  Vec integral(D.space.dim(), 0.0);
  for (std::size_t l = lo; l < hi; ++l)
    for (std::size_t j = 0; j < integral.size(); ++j)
      integral[j] += t.leaf_masses()[l] * at.values[(l - lo) * D.space.dim() + j];
  c.mean_slack = D.space.norm_raw(integral.data(), integral.size());
  c.norm_ratio = local_lq(t, D.space, at.cube, at.values, D.q) / atom_bound(at.cube, D.q);
  return c;
}

// CZ at heights 2^j: f = sum_j (g_{j+1} - g_j) + g_{jlo}, each piece split over the stopping cubes of height j.
inline AtomicDecomp atomic_decompose(const StepFunction& f, double qexp) {
  if (!(qexp > 1)) throw std::invalid_argument("atoms need q in (1, inf]");
  const auto& t = *f.tree();
  if (!t.is_uniform()) throw std::invalid_argument("atomic decomposition needs Lebesgue measure");
  const std::size_t d = f.dim();
  Vec mean = average(f, Cube::root(t.dim()));
  double sup = 0;
  for (std::size_t l = 0; l < f.leaf_count(); ++l) sup = std::max(sup, f.norm_at(l));
  if (f.space().norm_raw(mean.data(), d) > 1e-12 * std::max(1.0, sup))
    throw std::invalid_argument("atomic decomposition needs a mean-zero function");
  AtomicDecomp D{qexp, f.tree(), f.space(), {}, mean};
  auto nt = norm_average_table(f);
  const double root = nt.at(0, 0)[0];
  if (root == 0) return D;
  const int jlo = static_cast<int>(std::ceil(std::log2(root))) - 1;
  int jhi = jlo + 1;
  while (std::ldexp(1.0, jhi) < sup) ++jhi;
  auto good = [&](int j) {
    return j >= jhi ? f : calderon_zygmund(f, std::ldexp(1.0, j)).good;
  };
  StepFunction lowgood = good(jlo);
  for (int j = jlo; j < jhi; ++j) {
    StepFunction high = good(j + 1);
    auto cubes = t.maximal_cubes([&](const Cube& q) { return nt.at(q)[0] > std::ldexp(1.0, j); });
    for (const auto& q : cubes) {
      auto [lo, hi] = t.leaf_range(q);
      std::vector<double> v((hi - lo) * d);
      bool zero = true;
      for (std::size_t l = lo; l < hi; ++l)
        for (std::size_t k = 0; k < d; ++k) {
          double x = high.value(l)[k] - lowgood.value(l)[k];
          v[(l - lo) * d + k] = x;
          zero = zero && x == 0;
        }
      if (zero) continue;
      const double size = local_lq(t, f.space(), q, v, qexp) / atom_bound(q, qexp);
      for (auto& x : v) x /= size;
      D.atoms.push_back({size, q, j, std::move(v)});
    }
    lowgood = std::move(high);
  }
  return D;
}

// ---- postcondition reports: measured value against its bound ----

struct Postcondition {
  std::string name;
  double measured = 0;
  double bound = 0;
  double slack() const { return bound - measured; }
  bool ok() const { return measured <= bound; }
};

namespace detail {

inline double sup_norm_diff(const StepFunction& a, const StepFunction& b) {
  double s = 0;
  for (std::size_t l = 0; l < a.leaf_count(); ++l) {
    if (a.tree()->leaf_masses()[l] == 0) continue;
    auto x = a.value(l), y = b.value(l);
    Vec v(x.size());
    for (std::size_t j = 0; j < v.size(); ++j) v[j] = x[j] - y[j];
    s = std::max(s, a.space().norm(v));
  }
  return s;
}

inline double sup_norm(const StepFunction& f) { return lp_norm(f, kInf); }

}  // namespace detail

inline std::vector<Postcondition> cz_postconditions(const StepFunction& f, const CZResult& r, double tol = 1e-12) {
  const auto& t = *f.tree();
  std::vector<Postcondition> out;
  StepFunction sum = r.good + r.bad_sum();
  out.push_back({"reconstruction_residual", detail::sup_norm_diff(f, sum), tol});
  double mean = 0;
  for (std::size_t i = 0; i < r.bad.size(); ++i) {
    auto b = r.bad_function(i);
    auto a = average(b, r.bad[i].cube);
    mean = std::max(mean, f.space().norm(a));
  }
  out.push_back({"bad_part_mean", mean, tol});
  out.push_back({"stopping_mass", union_mass(t, r.stopping), lp_norm(f, 1) / r.height});
  if (t.is_uniform() && norm_average_table(f).at(0, 0)[0] <= r.height)
    out.push_back({"good_sup", detail::sup_norm(r.good), std::ldexp(r.height, t.dim()) + tol});
  out.push_back({"good_l1", lp_norm(r.good, 1), lp_norm(f, 1) * (1 + tol)});
  std::vector<char> in(t.leaf_count(), 0);
  for (const auto& q : r.stopping) {
    auto [lo, hi] = t.leaf_range(q);
    std::fill(in.begin() + lo, in.begin() + hi, 1);
  }
  auto up = rmf_upper(r.bad_sum());
  double outside = 0;
  for (std::size_t l = 0; l < t.leaf_count(); ++l)
    if (!in[l]) outside = std::max(outside, up[l]);
  out.push_back({"rmf_bad_outside", outside, 0.0});
  return out;
}

inline std::vector<Postcondition> gundy_postconditions(const StepFunction& f, const GundyResult& r,
                                                       double tol = 1e-12) {
  const auto& t = *f.tree();
  const double nf = lp_norm(f, 1);
  std::vector<Postcondition> out;
  out.push_back({"good_sup", detail::sup_norm(r.good), 3 * r.height + tol});
  out.push_back({"good_l1", lp_norm(r.good, 1), 3 * nf + tol});
  out.push_back({"jump_variation", martingale_variation(r.jump, r.min_level), 4 * nf + tol});
  auto Mb = dyadic_maximal(r.bad, r.min_level);
  double pos = 0;
  for (std::size_t l = 0; l < t.leaf_count(); ++l)
    if (Mb.values()[l] > 0) pos += t.leaf_masses()[l];
  out.push_back({"bad_support_mass", pos, nf / r.height});
  AverageTable tb(r.bad);
  double stopped = 0;
  for (std::size_t l = 0; l < t.leaf_count(); ++l)
    for (int j = r.min_level; j <= t.depth() && j <= r.tau[l]; ++j) {
      auto a = j == t.depth() ? r.bad.value(l) : tb.at(j, t.cube_of(l, j));
      stopped = std::max(stopped, f.space().norm_raw(a.data(), a.size()));
    }
  out.push_back({"bad_average_before_stop", stopped, 0.0});
  return out;
}

inline std::vector<Postcondition> atomic_postconditions(const StepFunction& f, const AtomicDecomp& D,
                                                        double tol = 1e-12) {
  std::vector<Postcondition> out;
  double scale = 1;
  for (std::size_t l = 0; l < f.leaf_count(); ++l) scale = std::max(scale, f.norm_at(l));
  out.push_back({"reconstruction_residual", detail::sup_norm_diff(f, D.reconstruct()), tol * scale});
  double support = 0, mean = 0, ratio = 0;
  for (std::size_t i = 0; i < D.atoms.size(); ++i) {
    auto c = check_atom(D, i);
    support += c.support ? 0 : 1;
    mean = std::max(mean, c.mean_slack);
    ratio = std::max(ratio, c.norm_ratio);
  }
  out.push_back({"atom_support_failures", support, 0.0});
  out.push_back({"atom_mean", mean, tol});
  out.push_back({"atom_norm_ratio", ratio, 1 + tol});
  const double h1 = h1_norm(f);
  out.push_back({"coefficient_sum_over_h1", h1 > 0 ? D.coefficient_sum() / h1 : 0.0, kInf});
  return out;
}

}  // namespace radmax
