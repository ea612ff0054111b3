#pragma once

#include <cmath>
#include <cstdint>
#include <stdexcept>
#include <vector>

#include "stepfn.hpp"
#include "util.hpp"

namespace radmax {

inline void check_positive_weight(const StepFunction& w) {
  if (w.dim() != 1) throw std::invalid_argument("weights are scalar functions");
  const auto& m = w.tree()->leaf_masses();
  for (std::size_t l = 0; l < w.leaf_count(); ++l)
    if (m[l] > 0 && !(w.values()[l] > 0)) throw std::invalid_argument("weight must be positive on positive-mass leaves");
}

// sup_Q <w>_Q (<w^{1-p'}>_Q)^{p-1}
inline double ap_characteristic(const StepFunction& w, double p) {
  if (!(p > 1) || std::isinf(p)) throw std::invalid_argument("A_p needs 1 < p < inf");
  check_positive_weight(w);
  const double e = -1.0 / (p - 1.0);
  std::vector<double> dual(w.leaf_count());
  const auto& m = w.tree()->leaf_masses();
  for (std::size_t l = 0; l < w.leaf_count(); ++l) dual[l] = m[l] > 0 ? std::pow(w.values()[l], e) : 0.0;
  AverageTable A(w), B(StepFunction::scalar(w.tree(), std::move(dual)));
  const auto& t = *w.tree();
  double best = 0;
  for (int k = 0; k <= t.depth(); ++k)
    for (std::size_t q = 0; q < t.cube_count(k); ++q) {
      if (t.mass(k, q) == 0) continue;
      const double b = B.at(k, q)[0];
      best = std::max(best, A.at(k, q)[0] * (p == 2 ? b : std::pow(b, p - 1.0)));
    }
  return best;
}

struct FairShare {
  double ratio = 0;
  Cube cube;
  std::vector<Cube> set;  // E as a union of same-level cubes
};

namespace detail {

inline double weighted_mass(const StepFunction& w, const Cube& q) {
  const auto& t = *w.tree();
  auto [lo, hi] = t.leaf_range(q);
  double s = 0;
  for (std::size_t l = lo; l < hi; ++l) s += t.leaf_masses()[l] * w.values()[l];
  return s;
}

inline void fair_share_consider(const StepFunction& w, double gamma, const Cube& Q, const std::vector<Cube>& E,
                                FairShare& best) {
  const auto& t = *w.tree();
  const double wQ = weighted_mass(w, Q), mQ = t.mass(Q);
  if (!(wQ > 0) || !(mQ > 0)) return;
  double wE = 0, mE = 0;
  for (const auto& c : E) wE += weighted_mass(w, c), mE += t.mass(c);
  if (!(mE > 0)) return;
  const double r = (wE / wQ) / std::pow(mE / mQ, gamma);
  if (r > best.ratio) best = {r, Q, E};
}

}  // namespace detail

// max over sampled (Q, E) of (w(E)/w(Q)) / (|E|/|Q|)^gamma, E a union of descendants of one level.
inline FairShare fair_share_ratio(const StepFunction& w, double gamma, std::size_t samples, std::uint64_t seed) {
  if (!(gamma > 0)) throw std::invalid_argument("gamma must be positive");
  check_positive_weight(w);
  const auto& t = *w.tree();
  Rng rng(seed);
  FairShare best;
  for (std::size_t s = 0; s < samples; ++s) {
    int k = static_cast<int>(rng() % static_cast<std::uint64_t>(t.depth() + 1));
    Cube Q{t.dim(), k, rng() % t.cube_count(k)};
    int j = k + static_cast<int>(rng() % static_cast<std::uint64_t>(t.depth() - k + 1));
    const std::size_t kids = std::size_t{1} << (t.dim() * (j - k));
    std::vector<Cube> E;
    while (E.empty())
      for (std::size_t i = 0; i < kids; ++i)
        if (rng() & 1u) E.push_back({t.dim(), j, (Q.morton << (t.dim() * (j - k))) | i});
    detail::fair_share_consider(w, gamma, Q, E, best);
  }
  return best;
}

// All cubes Q and all nonempty unions of same-level descendants; small trees only.
inline FairShare fair_share_exhaustive(const StepFunction& w, double gamma) {
  if (!(gamma > 0)) throw std::invalid_argument("gamma must be positive");
  check_positive_weight(w);
  const auto& t = *w.tree();
  if (t.dim() * t.depth() > 4) throw std::invalid_argument("exhaustive fair-share search limited to nN <= 4");
  FairShare best;
  for (int k = 0; k <= t.depth(); ++k)
    for (std::size_t qi = 0; qi < t.cube_count(k); ++qi) {
      Cube Q{t.dim(), k, qi};
      for (int j = k; j <= t.depth(); ++j) {
        const std::size_t kids = std::size_t{1} << (t.dim() * (j - k));
        for (std::uint64_t mask = 1; mask < (std::uint64_t{1} << kids); ++mask) {
          std::vector<Cube> E;
          for (std::size_t i = 0; i < kids; ++i)
            if ((mask >> i) & 1u) E.push_back({t.dim(), j, (Q.morton << (t.dim() * (j - k))) | i});
          detail::fair_share_consider(w, gamma, Q, E, best);
        }
      }
    }
  return best;
}

struct ScanRow {
  double q;
  double characteristic;  // of A_{p/q}
};

struct SelfImprovement {
  std::vector<ScanRow> rows;
  double largest_q = 0;
};

// Characteristics in A_{p/q} over a grid; all finite on a finite tree.
inline SelfImprovement self_improvement_scan(const StepFunction& w, double p, const std::vector<double>& q_grid) {
  if (q_grid.empty()) throw std::invalid_argument("empty q grid");
  SelfImprovement out;
  for (double q : q_grid) {
    if (!(q > 1) || !(q < p)) throw std::invalid_argument("scan needs 1 < q < p");
    double c = ap_characteristic(w, p / q);
    out.rows.push_back({q, c});
    if (std::isfinite(c)) out.largest_q = std::max(out.largest_q, q);
  }
  return out;
}

}  // namespace radmax
