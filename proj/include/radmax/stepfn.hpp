#pragma once

#include <algorithm>
#include <bit>
#include <cmath>
#include <numeric>
#include <optional>
#include <span>
#include <stdexcept>
#include <vector>

#include "dyadic.hpp"
#include "space.hpp"

namespace radmax {

class StepFunction {
 public:
  StepFunction(TreePtr tree, NormedSpace X) : tree_(std::move(tree)), X_(X) {
    if (!tree_) throw std::invalid_argument("null tree");
    v_.assign(tree_->leaf_count() * X_.dim(), 0.0);
  }

  StepFunction(TreePtr tree, NormedSpace X, std::vector<double> values)
      : tree_(std::move(tree)), X_(X), v_(std::move(values)) {
    if (!tree_) throw std::invalid_argument("null tree");
    if (v_.size() != tree_->leaf_count() * X_.dim())
      throw std::invalid_argument("value count must equal leaf count times dimension");
    for (double x : v_)
      if (!std::isfinite(x)) throw std::invalid_argument("non-finite function value");
  }

  static StepFunction scalar(TreePtr tree, std::vector<double> values) {
    return StepFunction(std::move(tree), NormedSpace::scalar(), std::move(values));
  }

  static StepFunction constant(TreePtr tree, NormedSpace X, std::span<const double> xi) {
    StepFunction f(std::move(tree), X);
    for (std::size_t i = 0; i < f.leaf_count(); ++i) std::copy(xi.begin(), xi.end(), f.value(i).begin());
    return f;
  }

  const TreePtr& tree() const { return tree_; }
  const NormedSpace& space() const { return X_; }
  std::size_t dim() const { return X_.dim(); }
  std::size_t leaf_count() const { return tree_->leaf_count(); }

  std::span<const double> value(std::size_t leaf) const { return {v_.data() + leaf * X_.dim(), X_.dim()}; }
  std::span<double> value(std::size_t leaf) { return {v_.data() + leaf * X_.dim(), X_.dim()}; }
  const std::vector<double>& values() const { return v_; }
  std::vector<double>& values() { return v_; }

  double norm_at(std::size_t leaf) const { return X_.norm_raw(v_.data() + leaf * X_.dim(), X_.dim()); }

  StepFunction with_space(NormedSpace X) const {
    if (X.dim() != X_.dim()) throw std::invalid_argument("dimension mismatch");
    return StepFunction(tree_, X, v_);
  }

  StepFunction& operator+=(const StepFunction& o) {
    check_same(o);
    for (std::size_t i = 0; i < v_.size(); ++i) v_[i] += o.v_[i];
    return *this;
  }
  StepFunction& operator-=(const StepFunction& o) {
    check_same(o);
    for (std::size_t i = 0; i < v_.size(); ++i) v_[i] -= o.v_[i];
    return *this;
  }
  StepFunction& operator*=(double c) {
    for (auto& x : v_) x *= c;
    return *this;
  }
  friend StepFunction operator+(StepFunction a, const StepFunction& b) { return a += b; }
  friend StepFunction operator-(StepFunction a, const StepFunction& b) { return a -= b; }
  friend StepFunction operator*(double c, StepFunction a) { return a *= c; }

  void check_same(const StepFunction& o) const {
    if (o.tree_ != tree_ && (o.tree_->dim() != tree_->dim() || o.tree_->depth() != tree_->depth() ||
                             o.tree_->leaf_masses() != tree_->leaf_masses()))
      throw std::invalid_argument("functions live on different trees");
    if (o.dim() != dim()) throw std::invalid_argument("functions have different value dimensions");
  }

 private:
  TreePtr tree_;
  NormedSpace X_;
  std::vector<double> v_;
};

// Averages of f over every cube of every level; mu(Q) = 0 gives the zero vector.
// Each average is a sequential sum over the cube's Morton leaf range.
class AverageTable {
 public:
  explicit AverageTable(const StepFunction& f) : n_(f.tree()->dim()), N_(f.tree()->depth()), d_(f.dim()) {
    const auto& t = *f.tree();
    const auto& m = t.leaf_masses();
    avg_.resize(N_ + 1);
    for (int k = 0; k <= N_; ++k) {
      const std::size_t cubes = t.cube_count(k), per = std::size_t{1} << (n_ * (N_ - k));
      auto& a = avg_[k];
      a.assign(cubes * d_, 0.0);
      for (std::size_t q = 0; q < cubes; ++q) {
        const double mu = t.mass(k, q);
        if (mu == 0) continue;
        double* out = a.data() + q * d_;
        for (std::size_t l = q * per; l < (q + 1) * per; ++l) {
          auto v = f.value(l);
          for (std::size_t j = 0; j < d_; ++j) out[j] += m[l] * v[j];
        }
        for (std::size_t j = 0; j < d_; ++j) out[j] /= mu;
      }
    }
  }

  std::span<const double> at(int level, std::size_t index) const { return {avg_[level].data() + index * d_, d_}; }
  std::span<const double> at(const Cube& q) const { return at(q.level, q.morton); }
  int depth() const { return N_; }

 private:
  int n_, N_;
  std::size_t d_;
  std::vector<std::vector<double>> avg_;
};

inline Vec average(const StepFunction& f, const Cube& q) {
  const auto& t = *f.tree();
  auto [lo, hi] = t.leaf_range(q);
  const double mu = t.mass(q);
  Vec out(f.dim(), 0.0);
  if (mu == 0) return out;
  const auto& m = t.leaf_masses();
  for (std::size_t l = lo; l < hi; ++l) {
    auto v = f.value(l);
    for (std::size_t j = 0; j < out.size(); ++j) out[j] += m[l] * v[j];
  }
  for (auto& x : out) x /= mu;
  return out;
}

inline StepFunction averaging_operator(const StepFunction& f, int k, const AverageTable* table = nullptr) {
  const auto& t = *f.tree();
  if (k < 0 || k > t.depth()) throw std::out_of_range("averaging level out of range");
  if (k == t.depth()) return f;
  std::optional<AverageTable> own;
  if (!table) table = &own.emplace(f);
  StepFunction out(f.tree(), f.space());
  for (std::size_t l = 0; l < t.leaf_count(); ++l) {
    auto a = table->at(k, t.cube_of(l, k));
    std::copy(a.begin(), a.end(), out.value(l).begin());
  }
  return out;
}

// (f - <f>_Q) 1_Q
inline StepFunction localize(const StepFunction& f, const Cube& q) {
  const auto& t = *f.tree();
  auto [lo, hi] = t.leaf_range(q);
  Vec c = average(f, q);
  StepFunction out(f.tree(), f.space());
  for (std::size_t l = lo; l < hi; ++l)
    for (std::size_t j = 0; j < c.size(); ++j) out.value(l)[j] = f.value(l)[j] - c[j];
  return out;
}

// ---- Haar system, Lebesgue measure ----

inline double haar_scale(const Cube& q) { return std::sqrt(std::ldexp(1.0, q.n * q.level)); }

inline int haar_sign(unsigned theta, unsigned digit) { return (std::popcount(theta & digit) & 1) ? -1 : 1; }

// Value of h_Q^theta on a leaf; zero outside Q.
inline double haar_value(const DyadicTree& t, const Cube& q, unsigned theta, std::size_t leaf) {
  if (q.level >= t.depth()) throw std::out_of_range("Haar functions need level < N");
  Cube l = t.leaf(leaf);
  if (!q.contains(l)) return 0.0;
  unsigned digit = static_cast<unsigned>(l.ancestor(q.level + 1).morton & ((1u << q.n) - 1));
  return haar_sign(theta, digit) * haar_scale(q);
}

inline StepFunction haar_function(TreePtr tree, const Cube& q, unsigned theta) {
  if (theta == 0 || theta >= (1u << tree->dim())) throw std::out_of_range("theta must be in {0,1}^n minus 0");
  tree->check_cube(q);
  StepFunction h(tree, NormedSpace::scalar());
  auto [lo, hi] = tree->leaf_range(q);
  for (std::size_t l = lo; l < hi; ++l) h.value(l)[0] = haar_value(*tree, q, theta, l);
  return h;
}

struct HaarCoeffs {
  TreePtr tree;
  NormedSpace space;
  Vec root_average;
  // level k < N: cube-major, then theta = 1..2^n-1, then d entries
  std::vector<std::vector<double>> coeffs;

  std::span<const double> at(const Cube& q, unsigned theta) const {
    const std::size_t nt = (std::size_t{1} << tree->dim()) - 1, d = space.dim();
    return {coeffs[q.level].data() + (q.morton * nt + (theta - 1)) * d, d};
  }
  std::span<double> at(const Cube& q, unsigned theta) {
    const std::size_t nt = (std::size_t{1} << tree->dim()) - 1, d = space.dim();
    return {coeffs[q.level].data() + (q.morton * nt + (theta - 1)) * d, d};
  }
};

inline HaarCoeffs haar_decompose(const StepFunction& f, const AverageTable* table = nullptr) {
  const auto& t = *f.tree();
  if (!t.is_uniform()) throw std::invalid_argument("Haar decomposition needs Lebesgue measure; use martingale_decompose");
  std::optional<AverageTable> own;
  if (!table) table = &own.emplace(f);
  const int n = t.dim(), N = t.depth();
  const unsigned nc = 1u << n;
  const std::size_t d = f.dim();
  HaarCoeffs h{f.tree(), f.space(), Vec(table->at(0, 0).begin(), table->at(0, 0).end()), {}};
  h.coeffs.resize(N);
  for (int k = 0; k < N; ++k) {
    h.coeffs[k].assign(t.cube_count(k) * (nc - 1) * d, 0.0);
    for (std::size_t qi = 0; qi < t.cube_count(k); ++qi) {
      Cube q{n, k, qi};
      const double s = std::sqrt(q.volume()) / nc;
      for (unsigned th = 1; th < nc; ++th) {
        auto c = h.at(q, th);
        for (unsigned dg = 0; dg < nc; ++dg) {
          auto a = table->at(k + 1, (qi << n) | dg);
          const int sg = haar_sign(th, dg);
          for (std::size_t j = 0; j < d; ++j) c[j] += sg * a[j];
        }
        for (std::size_t j = 0; j < d; ++j) c[j] *= s;
      }
    }
  }
  return h;
}

inline StepFunction haar_reconstruct(const HaarCoeffs& h) {
  const auto& t = *h.tree;
  const int n = t.dim(), N = t.depth();
  const unsigned nc = 1u << n;
  const std::size_t d = h.space.dim();
  std::vector<double> cur(h.root_average), next;
  for (int k = 0; k < N; ++k) {
    next.assign(t.cube_count(k + 1) * d, 0.0);
    for (std::size_t qi = 0; qi < t.cube_count(k); ++qi) {
      Cube q{n, k, qi};
      const double s = haar_scale(q);
      for (unsigned dg = 0; dg < nc; ++dg) {
        double* out = next.data() + ((qi << n) | dg) * d;
        for (std::size_t j = 0; j < d; ++j) out[j] = cur[qi * d + j];
        for (unsigned th = 1; th < nc; ++th) {
          auto c = h.at(q, th);
          const double sg = haar_sign(th, dg) * s;
          for (std::size_t j = 0; j < d; ++j) out[j] += sg * c[j];
        }
      }
    }
    cur.swap(next);
  }
  return StepFunction(h.tree, h.space, std::move(cur));
}

// ---- adapted (general mu) decomposition: f = A_{N0} f + sum_{k=N0}^{N-1} D_k f ----

struct MartingaleDecomposition {
  int base_level = 0;
  std::vector<StepFunction> terms;  // terms[0] = A_{N0} f, terms[i] = D_{N0+i-1} f
};

inline MartingaleDecomposition martingale_decompose(const StepFunction& f, int base_level = 0) {
  const int N = f.tree()->depth();
  if (base_level < 0 || base_level > N) throw std::out_of_range("base level out of range");
  AverageTable table(f);
  MartingaleDecomposition md{base_level, {}};
  StepFunction prev = averaging_operator(f, base_level, &table);
  md.terms.push_back(prev);
  for (int k = base_level; k < N; ++k) {
    StepFunction next = averaging_operator(f, k + 1, &table);
    md.terms.push_back(next - prev);
    prev = std::move(next);
  }
  return md;
}

inline StepFunction martingale_reconstruct(const MartingaleDecomposition& md) {
  if (md.terms.empty()) throw std::invalid_argument("empty decomposition");
  StepFunction out = md.terms[0];
  for (std::size_t i = 1; i < md.terms.size(); ++i) out += md.terms[i];
  return out;
}

// ---- norms ----

inline void check_weight(const StepFunction& f, const StepFunction* w) {
  if (!w) return;
  if (w->dim() != 1) throw std::invalid_argument("weight must be scalar");
  if (w->leaf_count() != f.leaf_count()) throw std::invalid_argument("weight lives on a different tree");
  for (double x : w->values())
    if (x < 0) throw std::invalid_argument("negative weight");
}

inline double lp_norm(const StepFunction& f, double p, const StepFunction* w = nullptr) {
  if (!(p >= 1)) throw std::invalid_argument("p must be >= 1");
  check_weight(f, w);
  const auto& m = f.tree()->leaf_masses();
  if (std::isinf(p)) {
    double s = 0;
    for (std::size_t l = 0; l < f.leaf_count(); ++l)
      if (m[l] > 0 && (!w || w->values()[l] > 0)) s = std::max(s, f.norm_at(l));
    return s;
  }
  double s = 0;
  for (std::size_t l = 0; l < f.leaf_count(); ++l) {
    double mass = m[l] * (w ? w->values()[l] : 1.0);
    if (mass == 0) continue;
    double a = f.norm_at(l);
    s += mass * (p == 1 ? a : p == 2 ? a * a : std::pow(a, p));
  }
  return p == 1 ? s : p == 2 ? std::sqrt(s) : std::pow(s, 1.0 / p);
}

// sup_t t * mu{g > t} on a finite-valued g, attained just below each value.
inline double weak_l1(const StepFunction& g) {
  if (g.dim() != 1) throw std::invalid_argument("weak_l1 takes a scalar function");
  const auto& m = g.tree()->leaf_masses();
  std::vector<std::pair<double, double>> vm;
  for (std::size_t l = 0; l < g.leaf_count(); ++l) {
    double v = g.values()[l];
    if (v < 0) throw std::invalid_argument("weak_l1 needs a nonnegative function");
    if (m[l] > 0 && v > 0) vm.emplace_back(v, m[l]);
  }
  std::sort(vm.begin(), vm.end(), [](auto& a, auto& b) { return a.first > b.first; });
  double best = 0, cum = 0;
  for (std::size_t i = 0; i < vm.size(); ++i) {
    cum += vm[i].second;
    if (i + 1 < vm.size() && vm[i + 1].first == vm[i].first) continue;
    best = std::max(best, vm[i].first * cum);
  }
  return best;
}

enum class Centering { average, optimal };

// Centre of the mu-weighted median interval of the scalar values on [lo, hi).
inline double weighted_median(const StepFunction& f, std::size_t lo, std::size_t hi) {
  const auto& m = f.tree()->leaf_masses();
  std::vector<std::pair<double, double>> vm;
  double total = 0;
  for (std::size_t l = lo; l < hi; ++l)
    if (m[l] > 0) vm.emplace_back(f.values()[l], m[l]), total += m[l];
  if (vm.empty()) return 0.0;
  std::sort(vm.begin(), vm.end());
  const double half = total / 2;
  double cum = 0;
  for (std::size_t i = 0; i < vm.size(); ++i) {
    cum += vm[i].second;
    if (cum > half) return vm[i].first;
    if (cum == half) {
      std::size_t j = i + 1;
      while (j < vm.size() && vm[j].first == vm[i].first) ++j;
      return j < vm.size() ? (vm[i].first + vm[j].first) / 2 : vm[i].first;
    }
  }
  return vm.back().first;
}

inline double bmo_norm(const StepFunction& f, double p = 1, Centering c = Centering::average) {
  if (!(p >= 1) || std::isinf(p)) throw std::invalid_argument("BMO exponent must be finite and >= 1");
  if (c == Centering::optimal && (f.dim() != 1 || p != 1))
    throw std::invalid_argument("optimal-constant centering needs a scalar function and p = 1");
  const auto& t = *f.tree();
  const auto& m = t.leaf_masses();
  std::optional<AverageTable> table;
  if (c == Centering::average) table.emplace(f);
  double best = 0;
  Vec diff(f.dim());
  for (int k = 0; k <= t.depth(); ++k) {
    for (std::size_t q = 0; q < t.cube_count(k); ++q) {
      const double mu = t.mass(k, q);
      if (mu == 0) continue;
      auto [lo, hi] = t.leaf_range({t.dim(), k, q});
      double s = 0;
      if (c == Centering::average) {
        auto a = table->at(k, q);
        for (std::size_t l = lo; l < hi; ++l) {
          if (m[l] == 0) continue;
          for (std::size_t j = 0; j < diff.size(); ++j) diff[j] = f.value(l)[j] - a[j];
          double x = f.space().norm_raw(diff.data(), diff.size());
          s += m[l] * (p == 1 ? x : std::pow(x, p));
        }
      } else {
        const double med = weighted_median(f, lo, hi);
        for (std::size_t l = lo; l < hi; ++l)
          if (m[l] > 0) s += m[l] * std::abs(f.values()[l] - med);
      }
      s /= mu;
      best = std::max(best, p == 1 ? s : std::pow(s, 1.0 / p));
    }
  }
  return best;
}

}  // namespace radmax
