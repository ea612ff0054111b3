#pragma once

#include <cstdint>
#include <map>
#include <span>
#include <stdexcept>
#include <vector>

#include "dyadic.hpp"
#include "stepfn.hpp"
#include "util.hpp"

namespace radmax {

inline std::int64_t floor_div(std::int64_t a, std::int64_t b) {
  std::int64_t q = a / b;
  return (a % b != 0 && ((a < 0) != (b < 0))) ? q - 1 : q;
}

// Cells of side 2^{-M} covering the window [-1,2)^n. A cell is named by its
// absolute integer corner a (x = a 2^{-M}), a_i in [-2^M, 2^{M+1}).
class WindowGrid {
 public:
  WindowGrid(int n, int M) : n_(n), M_(M) {
    if (n < 1 || M < 0) throw std::invalid_argument("bad window grid shape");
    side_ = 3 * (std::int64_t{1} << M);
    count_ = 1;
    for (int i = 0; i < n; ++i) {
      count_ *= static_cast<std::size_t>(side_);
      if (count_ > (std::size_t{1} << 26)) throw std::invalid_argument("window grid too large");
    }
  }
  int dim() const { return n_; }
  int resolution() const { return M_; }
  std::size_t cell_count() const { return count_; }
  std::int64_t lo() const { return -(std::int64_t{1} << M_); }
  std::int64_t hi() const { return 2 * (std::int64_t{1} << M_); }

  bool inside(std::span<const std::int64_t> a) const {
    for (auto x : a)
      if (x < lo() || x >= hi()) return false;
    return true;
  }
  // Lexicographic, axis 1 most significant.
  std::size_t index(std::span<const std::int64_t> a) const {
    std::size_t idx = 0;
    for (auto x : a) idx = idx * static_cast<std::size_t>(side_) + static_cast<std::size_t>(x - lo());
    return idx;
  }
  std::vector<std::int64_t> corner(std::size_t idx) const {
    std::vector<std::int64_t> a(n_);
    for (int i = n_ - 1; i >= 0; --i) {
      a[i] = static_cast<std::int64_t>(idx % static_cast<std::size_t>(side_)) + lo();
      idx /= static_cast<std::size_t>(side_);
    }
    return a;
  }
  bool operator==(const WindowGrid&) const = default;

 private:
  int n_, M_;
  std::int64_t side_;
  std::size_t count_;
};

struct GridFunction {
  WindowGrid grid;
  NormedSpace space;
  std::vector<double> values;

  GridFunction(WindowGrid g, NormedSpace X) : grid(g), space(X), values(g.cell_count() * X.dim(), 0.0) {}
  std::span<const double> value(std::size_t cell) const { return {values.data() + cell * space.dim(), space.dim()}; }
  std::span<double> value(std::size_t cell) { return {values.data() + cell * space.dim(), space.dim()}; }
};

// f on a Lebesgue tree of depth D <= M, placed on [0,1)^n, zero elsewhere.
inline GridFunction embed(const StepFunction& f, int M) {
  const auto& t = *f.tree();
  if (!t.is_uniform()) throw std::invalid_argument("window embedding needs Lebesgue measure");
  if (t.depth() > M) throw std::invalid_argument("grid resolution below tree depth");
  WindowGrid g(t.dim(), M);
  GridFunction out(g, f.space());
  const int up = M - t.depth();
  std::vector<std::int64_t> a(t.dim());
  for (std::size_t idx = 0; idx < g.cell_count(); ++idx) {
    a = g.corner(idx);
    bool in = true;
    std::vector<std::uint64_t> m(t.dim());
    for (int i = 0; i < t.dim(); ++i) {
      if (a[i] < 0 || a[i] >= (std::int64_t{1} << M)) in = false;
      else m[i] = static_cast<std::uint64_t>(a[i]) >> up;
    }
    if (!in) continue;
    auto v = f.value(Cube::from_coords(m, t.depth()).morton);
    std::copy(v.begin(), v.end(), out.value(idx).begin());
  }
  return out;
}

// Dyadic system D^beta with beta_j in {0,1}^n supported on 1 <= j <= M;
// levels k >= 0 only see beta_j for j > k >= 0.
class ShiftedSystem {
 public:
  ShiftedSystem(int n, int M, std::map<int, std::vector<int>> beta) : n_(n), M_(M), beta_(std::move(beta)) {
    for (auto& [j, b] : beta_) {
      if (j < 1 || j > M) throw std::invalid_argument("beta must be supported on 1..M for an exact grid shift");
      if (static_cast<int>(b.size()) != n) throw std::invalid_argument("beta_j must have n entries");
      for (int x : b)
        if (x != 0 && x != 1) throw std::invalid_argument("beta_j entries must be 0 or 1");
    }
  }

  static ShiftedSystem random(int n, int M, Rng& rng) {
    std::map<int, std::vector<int>> beta;
    for (int j = 1; j <= M; ++j) {
      std::vector<int> b(n);
      bool any = false;
      for (auto& x : b) any |= (x = static_cast<int>(rng() & 1u)) != 0;
      if (any) beta[j] = b;
    }
    return ShiftedSystem(n, M, beta);
  }

  int dim() const { return n_; }
  int resolution() const { return M_; }
  const std::map<int, std::vector<int>>& beta() const { return beta_; }

  // sum_{j>k} 2^{-j} beta_j in grid units
  std::vector<std::int64_t> shift(int k) const {
    std::vector<std::int64_t> s(n_, 0);
    for (auto& [j, b] : beta_)
      if (j > k)
        for (int i = 0; i < n_; ++i) s[i] += static_cast<std::int64_t>(b[i]) << (M_ - j);
    return s;
  }

  // 2^{-j} beta_j in grid units
  std::vector<std::int64_t> sigma(int j) const {
    std::vector<std::int64_t> s(n_, 0);
    auto it = beta_.find(j);
    if (it != beta_.end())
      for (int i = 0; i < n_; ++i) s[i] = static_cast<std::int64_t>(it->second[i]) << (M_ - j);
    return s;
  }

 private:
  int n_, M_;
  std::map<int, std::vector<int>> beta_;
};

// g(x) = f(x + s); cells whose source leaves the window read zero.
inline GridFunction translate(const GridFunction& f, std::span<const std::int64_t> s) {
  GridFunction out(f.grid, f.space);
  std::vector<std::int64_t> a;
  for (std::size_t idx = 0; idx < f.grid.cell_count(); ++idx) {
    a = f.grid.corner(idx);
    for (std::size_t i = 0; i < a.size(); ++i) a[i] += s[i];
    if (!f.grid.inside(a)) continue;
    auto v = f.value(f.grid.index(a));
    std::copy(v.begin(), v.end(), out.value(idx).begin());
  }
  return out;
}

inline GridFunction negate_translate(const GridFunction& f, std::span<const std::int64_t> s) {
  std::vector<std::int64_t> m(s.begin(), s.end());
  for (auto& x : m) x = -x;
  return translate(f, m);
}

// Averages over the cubes 2^{-k}([0,1)^n + m) + offset; each cube is summed in
// cube-relative lexicographic order with out-of-window cells read as zero.
inline GridFunction offset_average(int k, const GridFunction& f, std::span<const std::int64_t> offset) {
  const auto& g = f.grid;
  const int M = g.resolution(), n = g.dim();
  if (k < 0 || k > M) throw std::out_of_range("averaging level must satisfy 0 <= k <= M");
  const std::int64_t s = std::int64_t{1} << (M - k);
  const std::size_t d = f.space.dim();
  const double scale = std::ldexp(1.0, -n * (M - k));
  GridFunction out(g, f.space);
  std::vector<std::int64_t> qlo(n), qhi(n), q(n), a(n), r(n);
  for (int i = 0; i < n; ++i) {
    qlo[i] = floor_div(g.lo() - offset[i], s);
    qhi[i] = floor_div(g.hi() - 1 - offset[i], s);
  }
  q = qlo;
  std::vector<double> acc(d);
  while (true) {
    std::fill(acc.begin(), acc.end(), 0.0);
    std::fill(r.begin(), r.end(), 0);
    while (true) {
      for (int i = 0; i < n; ++i) a[i] = q[i] * s + offset[i] + r[i];
      if (g.inside(a)) {
        auto v = f.value(g.index(a));
        for (std::size_t j = 0; j < d; ++j) acc[j] += v[j];
      }
      int i = n - 1;
      while (i >= 0 && ++r[i] == s) r[i--] = 0;
      if (i < 0) break;
    }
    for (auto& x : acc) x *= scale;
    std::fill(r.begin(), r.end(), 0);
    while (true) {
      for (int i = 0; i < n; ++i) a[i] = q[i] * s + offset[i] + r[i];
      if (g.inside(a)) std::copy(acc.begin(), acc.end(), out.value(g.index(a)).begin());
      int i = n - 1;
      while (i >= 0 && ++r[i] == s) r[i--] = 0;
      if (i < 0) break;
    }
    int i = n - 1;
    while (i >= 0 && q[i] == qhi[i]) q[i] = qlo[i], --i;
    if (i < 0) break;
    ++q[i];
  }
  return out;
}

inline GridFunction standard_average(int k, const GridFunction& f) {
  std::vector<std::int64_t> zero(f.grid.dim(), 0);
  return offset_average(k, f, zero);
}

// A^beta_k f on the window grid.
inline GridFunction shifted_average(const ShiftedSystem& sys, int k, const GridFunction& f) {
  if (sys.dim() != f.grid.dim() || sys.resolution() != f.grid.resolution())
    throw std::invalid_argument("system and grid disagree");
  if (k > sys.resolution()) throw std::out_of_range("level k exceeds the grid resolution M");
  return offset_average(k, f, sys.shift(k));
}

// tau_N^{-1} A_k tau_N f
inline GridFunction conjugated_average(const ShiftedSystem& sys, int N, int k, const GridFunction& f) {
  auto s = sys.shift(N);
  return negate_translate(standard_average(k, translate(f, s)), s);
}

}  // namespace radmax
