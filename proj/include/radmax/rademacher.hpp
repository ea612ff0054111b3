#pragma once

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <map>
#include <optional>
#include <span>
#include <stdexcept>
#include <string>
#include <string_view>
#include <vector>

#include "space.hpp"
#include "util.hpp"

namespace radmax {

struct CapExceeded : std::runtime_error {
  using std::runtime_error::runtime_error;
};

inline constexpr std::size_t kDefaultEnumerationCap = 24;

struct Selection {
  std::vector<std::size_t> indices;
  std::vector<double> coeffs;
  bool operator==(const Selection&) const = default;
};

enum class UpperMethod { sequence_sum, telescoping, hilbert_exact, type2_heuristic };

inline std::string_view method_name(UpperMethod m) {
  switch (m) {
    case UpperMethod::sequence_sum: return "sequence-sum";
    case UpperMethod::telescoping: return "telescoping";
    case UpperMethod::hilbert_exact: return "hilbert-exact";
    case UpperMethod::type2_heuristic: return "type2-heuristic";
  }
  return "?";
}

struct RadEstimate {
  double lower = 0;
  Selection lower_witness;
  double upper = 0;
  UpperMethod upper_method = UpperMethod::sequence_sum;
  std::optional<double> type2_advisory;
  bool operator==(const RadEstimate&) const = default;
};

namespace detail {

// E||sum eps_k lam_k r_k||^2 by enumeration of 2^{k-1} sign patterns.
// Columns equal up to sign are merged beforehand (an isometry of the
// coordinates that appear), zero columns dropped.
class SignSum {
 public:
  SignSum(const NormedSpace& X, std::span<const double* const> rows, std::size_t cap)
      : p_(X.exponent()), inf_(X.is_inf()), k_(rows.size()), X_(X) {
    if (k_ == 0) throw std::invalid_argument("empty randomized sum");
    if (k_ > cap || k_ > 31) throw CapExceeded("sign enumeration cap exceeded (" + std::to_string(k_) + " > " +
                                    std::to_string(cap) + ")");
    const std::size_t d = X.dim();
    single_.assign(rows[0], rows[0] + d);
    std::map<std::vector<double>, std::size_t> seen;
    std::vector<std::vector<double>> cols;
    std::vector<double> mult;
    std::vector<double> c(k_);
    for (std::size_t j = 0; j < d; ++j) {
      double lead = 0;
      for (std::size_t i = 0; i < k_; ++i) {
        c[i] = rows[i][j] == 0 ? 0.0 : rows[i][j];
        if (lead == 0) lead = c[i];
      }
      if (lead == 0) continue;
      if (lead < 0)
        for (auto& x : c) x = x == 0 ? 0.0 : -x;
      auto [it, fresh] = seen.emplace(c, cols.size());
      if (fresh) {
        cols.push_back(c);
        mult.push_back(1);
      } else {
        mult[it->second] += 1;
      }
    }
    w_ = cols.size();
    data_.assign(k_ * w_, 0.0);
    for (std::size_t j = 0; j < w_; ++j) {
      double s = 1;
      if (mult[j] != 1 && !inf_) s = p_ == 1.0 ? mult[j] : p_ == 2.0 ? std::sqrt(mult[j]) : std::pow(mult[j], 1.0 / p_);
      for (std::size_t i = 0; i < k_; ++i) data_[i * w_ + j] = cols[j][i] * s;
    }
    buf_.assign((k_ + 1) * std::max<std::size_t>(w_, 1), 0.0);
    gbuf_.assign(std::max<std::size_t>(w_, 1), 0.0);
  }

  std::size_t terms() const { return k_; }
  std::size_t width() const { return w_; }

  // The reported Rademacher norm; k = 1 uses the uncompressed vector.
  double value(std::span<const double> lam) const {
    if (k_ == 1) {
      std::vector<double> v(single_);
      for (auto& x : v) x *= lam[0];
      return X_.norm_raw(v.data(), v.size());
    }
    return std::sqrt(mean_square(lam));
  }

  double mean_square(std::span<const double> lam) const {
    lam_ = lam.data();
    grad_ = nullptr;
    acc_ = 0;
    run();
    return acc_ / std::ldexp(1.0, static_cast<int>(k_) - 1);
  }

  // Returns F and writes a (sub)gradient of F = E||s||^2 into grad.
  double mean_square_grad(std::span<const double> lam, std::span<double> grad) const {
    std::fill(grad.begin(), grad.end(), 0.0);
    lam_ = lam.data();
    grad_ = grad.data();
    acc_ = 0;
    run();
    const double scale = std::ldexp(1.0, static_cast<int>(k_) - 1);
    for (auto& g : grad) g /= scale;
    grad_ = nullptr;
    return acc_ / scale;
  }

 private:
  void run() const {
    double* b0 = buf_.data();
    for (std::size_t j = 0; j < w_; ++j) b0[j] = lam_[0] * data_[j];
    rec(1, 1u);
  }

  void rec(std::size_t i, std::uint32_t signs) const {
    const double* prev = buf_.data() + (i - 1) * w_;
    if (i == k_) {
      leaf(prev, signs);
      return;
    }
    double* cur = buf_.data() + i * w_;
    const double* r = data_.data() + i * w_;
    const double l = lam_[i];
    for (std::size_t j = 0; j < w_; ++j) cur[j] = prev[j] + l * r[j];
    rec(i + 1, signs | (1u << i));
    for (std::size_t j = 0; j < w_; ++j) cur[j] = prev[j] - l * r[j];
    rec(i + 1, signs);
  }

  void leaf(const double* s, std::uint32_t signs) const {
    const double nrm = X_.norm_raw(s, w_);
    acc_ += nrm * nrm;
    if (!grad_ || nrm == 0) return;
    double* G = gbuf_.data();
    if (inf_) {
      std::size_t arg = 0;
      for (std::size_t j = 0; j < w_; ++j)
        if (std::abs(s[j]) > std::abs(s[arg])) arg = j;
      std::fill(G, G + w_, 0.0);
      G[arg] = s[arg] > 0 ? nrm : -nrm;
    } else if (p_ == 2.0) {
      for (std::size_t j = 0; j < w_; ++j) G[j] = s[j];
    } else if (p_ == 1.0) {
      for (std::size_t j = 0; j < w_; ++j) G[j] = s[j] > 0 ? nrm : s[j] < 0 ? -nrm : 0.0;
    } else {
      const double f = std::pow(nrm, 2.0 - p_);
      for (std::size_t j = 0; j < w_; ++j) {
        double a = std::pow(std::abs(s[j]), p_ - 1.0) * f;
        G[j] = s[j] > 0 ? a : s[j] < 0 ? -a : 0.0;
      }
    }
    for (std::size_t i = 0; i < k_; ++i) {
      const double* r = data_.data() + i * w_;
      double dot = 0;
      for (std::size_t j = 0; j < w_; ++j) dot += G[j] * r[j];
      grad_[i] += ((signs >> i) & 1u) ? 2.0 * dot : -2.0 * dot;
    }
  }

  double p_;
  bool inf_;
  std::size_t k_;
  std::size_t w_ = 0;
  NormedSpace X_;
  std::vector<double> single_;
  std::vector<double> data_;
  mutable std::vector<double> buf_, gbuf_;
  mutable const double* lam_ = nullptr;
  mutable double* grad_ = nullptr;
  mutable double acc_ = 0;
};

inline void check_vectors(const NormedSpace& X, std::span<const Vec> S) {
  for (const auto& v : S) {
    if (v.size() != X.dim()) throw std::invalid_argument("dimension mismatch in vector set");
    for (double x : v)
      if (!std::isfinite(x)) throw std::invalid_argument("non-finite entry in vector set");
  }
}

inline double l2(std::span<const double> v) {
  double s = 0;
  for (double x : v) s += x * x;
  return std::sqrt(s);
}

inline bool normalize(std::vector<double>& v) {
  double n = l2(v);
  if (!(n > 0)) return false;
  for (auto& x : v) x /= n;
  return true;
}

inline SignSum make_sum(const NormedSpace& X, std::span<const Vec> S, std::span<const std::size_t> idx,
                        std::size_t cap) {
  std::vector<const double*> rows;
  rows.reserve(idx.size());
  for (auto i : idx) {
    if (i >= S.size()) throw std::out_of_range("selection index out of range");
    rows.push_back(S[i].data());
  }
  return SignSum(X, rows, cap);
}

// Monotone ascent for a convex objective on the sphere: lam <- grad/|grad|.
inline double power_polish(const SignSum& E, std::vector<double>& lam, std::size_t max_iter, double tol) {
  double F = E.mean_square(lam);
  std::vector<double> g(lam.size()), next(lam.size());
  for (std::size_t it = 0; it < max_iter; ++it) {
    E.mean_square_grad(lam, g);
    next = g;
    if (!normalize(next)) break;
    double Fn = E.mean_square(next);
    if (!(Fn > F)) break;
    bool small = Fn - F <= tol * std::max(F, 1e-300);
    lam.swap(next);
    F = Fn;
    if (small) break;
  }
  return F;
}

// Projected gradient ascent, step 0.1/sqrt(iter) along the normalized gradient.
inline double projected_ascent(const SignSum& E, std::vector<double>& lam, std::size_t iters) {
  std::vector<double> cur = lam, g(lam.size());
  double best = E.mean_square(cur);
  for (std::size_t it = 1; it <= iters; ++it) {
    E.mean_square_grad(cur, g);
    double gn = l2(g);
    if (!(gn > 0)) break;
    const double step = 0.1 / std::sqrt(static_cast<double>(it));
    for (std::size_t i = 0; i < cur.size(); ++i) cur[i] += step * g[i] / gn;
    if (!normalize(cur)) break;
    double F = E.mean_square(cur);
    if (F > best) {
      best = F;
      lam = cur;
    }
  }
  return best;
}

struct Best {
  double value = -1;
  Selection sel;
  void consider(double v, const std::vector<std::size_t>& idx, const std::vector<double>& lam) {
    if (v > value) {
      value = v;
      sel.indices = idx;
      sel.coeffs = lam;
    }
  }
};

}  // namespace detail

inline double rademacher_norm(const NormedSpace& X, std::span<const Vec> vectors, std::span<const double> coeffs,
                              std::size_t cap = kDefaultEnumerationCap) {
  if (vectors.empty()) throw std::invalid_argument("rademacher_norm needs k >= 1");
  if (vectors.size() != coeffs.size()) throw std::invalid_argument("vector and coefficient counts differ");
  detail::check_vectors(X, vectors);
  std::vector<const double*> rows;
  for (const auto& v : vectors) rows.push_back(v.data());
  return detail::SignSum(X, rows, cap).value(coeffs);
}

inline double rademacher_norm(const NormedSpace& X, std::span<const Vec> S, const Selection& sel,
                              std::size_t cap = kDefaultEnumerationCap) {
  if (sel.indices.empty() || sel.indices.size() != sel.coeffs.size())
    throw std::invalid_argument("malformed selection");
  return detail::make_sum(X, S, sel.indices, cap).value(sel.coeffs);
}

inline std::pair<double, UpperMethod> rbound_upper(const NormedSpace& X, std::span<const Vec> S,
                                                   bool chain_ordered = false) {
  if (S.empty()) throw std::invalid_argument("empty vector set");
  detail::check_vectors(X, S);
  double best = kInf;
  UpperMethod tag = UpperMethod::sequence_sum;
  if (X.is_hilbert()) {
    double m = 0;
    for (const auto& v : S) m = std::max(m, X.norm(v));
    best = m;
    tag = UpperMethod::hilbert_exact;
  }
  if (chain_ordered) {
    double t = X.norm(S[0]);
    Vec diff(X.dim());
    for (std::size_t k = 1; k < S.size(); ++k) {
      for (std::size_t j = 0; j < diff.size(); ++j) diff[j] = S[k][j] - S[k - 1][j];
      t += X.norm(diff);
    }
    if (t < best) {
      best = t;
      tag = UpperMethod::telescoping;
    }
  }
  double s = 0;
  for (const auto& v : S) s += X.norm(v);
  if (s < best) {
    best = s;
    tag = UpperMethod::sequence_sum;
  }
  return {best, tag};
}

// sqrt(p-1) * max|xi| for 2 <= p < inf. Advisory only.
inline std::optional<double> type2_heuristic(const NormedSpace& X, std::span<const Vec> S) {
  const double p = X.exponent();
  if (X.is_inf() || p < 2.0) return std::nullopt;
  double m = 0;
  for (const auto& v : S) m = std::max(m, X.norm(v));
  return std::sqrt(p - 1.0) * m;
}

struct LowerConfig {
  std::size_t max_len = 8;
  std::size_t restarts = 8;
  std::uint64_t seed = 0;
  std::vector<Selection> warm_starts;
  std::size_t cap = kDefaultEnumerationCap;
  bool hilbert_closed_form = true;
  bool chain_ordered = false;
  std::size_t ascent_iters = 200;
  std::size_t polish_iters = 30;
};

struct OracleConfig {
  std::size_t max_len = 4;
  int grid = 6;
  double tolerance = 1e-12;
  std::size_t multiset_cap = 20000;
  std::size_t grid_budget = 4096;
  std::size_t cap = kDefaultEnumerationCap;
  std::vector<Selection> warm_starts;
  bool chain_ordered = false;
};

namespace detail {

inline void finish(const NormedSpace& X, std::span<const Vec> S, Best& best, bool chain, RadEstimate& out) {
  out.lower = best.value;
  out.lower_witness = std::move(best.sel);
  auto [u, tag] = rbound_upper(X, S, chain);
  out.upper = u;
  out.upper_method = tag;
  out.type2_advisory = type2_heuristic(X, S);
}

inline void seed_singletons(const NormedSpace& X, std::span<const Vec> S, Best& best) {
  for (std::size_t i = 0; i < S.size(); ++i) best.consider(X.norm(S[i]), {i}, {1.0});
}

inline void seed_warm(const NormedSpace& X, std::span<const Vec> S, const std::vector<Selection>& warm,
                      std::size_t cap, Best& best, std::size_t polish, double tol) {
  for (const auto& w : warm) {
    if (w.indices.empty() || w.indices.size() != w.coeffs.size())
      throw std::invalid_argument("malformed warm start");
    auto E = make_sum(X, S, w.indices, cap);
    best.consider(E.value(w.coeffs), w.indices, w.coeffs);
    if (polish > 0 && w.indices.size() > 1) {
      std::vector<double> lam = w.coeffs;
      if (!normalize(lam)) continue;
      power_polish(E, lam, polish, tol);
      best.consider(E.value(lam), w.indices, lam);
    }
  }
}

}  // namespace detail

inline RadEstimate rbound_lower(const NormedSpace& X, std::span<const Vec> S, const LowerConfig& cfg = {}) {
  if (S.empty()) throw std::invalid_argument("rbound_lower needs a nonempty set");
  detail::check_vectors(X, S);
  detail::Best best;
  detail::seed_singletons(X, S, best);
  const bool closed = cfg.hilbert_closed_form && X.is_hilbert();
  detail::seed_warm(X, S, cfg.warm_starts, cfg.cap, best, closed ? 0 : cfg.polish_iters, 1e-12);
  const std::size_t m = S.size();
  const std::size_t L = std::min(cfg.max_len, cfg.cap);
  if (!closed && L >= 2) {
    // greedy growth from the best singleton
    std::vector<std::size_t> cur = best.sel.indices;
    std::vector<double> lam = best.sel.coeffs;
    if (cur.size() != 1) {
      cur = {0};
      lam = {1.0};
      double b = -1;
      for (std::size_t i = 0; i < m; ++i)
        if (double v = X.norm(S[i]); v > b) b = v, cur[0] = i;
    }
    double curF = X.norm(S[cur[0]]);
    curF *= curF;
    while (cur.size() < L) {
      const double len = static_cast<double>(cur.size());
      double bestF = -1;
      std::vector<std::size_t> bestIdx;
      std::vector<double> bestLam;
      for (std::size_t i = 0; i < m; ++i) {
        std::vector<std::size_t> idx = cur;
        idx.push_back(i);
        std::vector<double> l0;
        for (double x : lam) l0.push_back(x * std::sqrt(len / (len + 1)));
        l0.push_back(1.0 / std::sqrt(len + 1));
        auto E = detail::make_sum(X, S, idx, cfg.cap);
        double F = detail::power_polish(E, l0, cfg.polish_iters, 1e-12);
        if (F > bestF) {
          bestF = F;
          bestIdx = std::move(idx);
          bestLam = std::move(l0);
        }
      }
      if (!(bestF > curF * (1 + 1e-12))) break;
      cur = std::move(bestIdx);
      lam = std::move(bestLam);
      curF = bestF;
      best.consider(detail::make_sum(X, S, cur, cfg.cap).value(lam), cur, lam);
    }
    // equal coefficients over the whole set
    if (m >= 2 && m <= cfg.cap) {
      std::vector<std::size_t> idx(m);
      for (std::size_t i = 0; i < m; ++i) idx[i] = i;
      std::vector<double> l0(m, 1.0 / std::sqrt(static_cast<double>(m)));
      auto E = detail::make_sum(X, S, idx, cfg.cap);
      best.consider(E.value(l0), idx, l0);
      detail::power_polish(E, l0, cfg.polish_iters, 1e-12);
      best.consider(E.value(l0), idx, l0);
    }
    // random restarts on the greedy selection
    if (cur.size() >= 2 && cfg.restarts > 0) {
      auto E = detail::make_sum(X, S, cur, cfg.cap);
      for (std::size_t r = 0; r < cfg.restarts; ++r) {
        Rng rng(derive_seed(cfg.seed, r));
        std::vector<double> l0(cur.size());
        for (auto& x : l0) x = std::abs(gaussian(rng));
        if (!detail::normalize(l0)) continue;
        detail::projected_ascent(E, l0, cfg.ascent_iters);
        detail::power_polish(E, l0, cfg.polish_iters, 1e-12);
        best.consider(E.value(l0), cur, l0);
      }
    }
  }
  RadEstimate out;
  detail::finish(X, S, best, cfg.chain_ordered, out);
  return out;
}

inline std::size_t multiset_count(std::size_t m, std::size_t L, std::size_t limit) {
  // sum_{j=1..L} C(m+j-1, j), saturating above limit
  std::size_t total = 0;
  double c = 1;
  for (std::size_t j = 1; j <= L; ++j) {
    c = c * static_cast<double>(m + j - 1) / static_cast<double>(j);
    total += static_cast<std::size_t>(std::min(c, static_cast<double>(limit) + 1));
    if (total > limit) return limit + 1;
  }
  return total;
}

inline RadEstimate rbound_oracle(const NormedSpace& X, std::span<const Vec> S, const OracleConfig& cfg = {}) {
  if (S.empty()) throw std::invalid_argument("rbound_oracle needs a nonempty set");
  detail::check_vectors(X, S);
  const std::size_t m = S.size();
  if (cfg.max_len == 0) throw std::invalid_argument("max_len must be positive");
  if (cfg.max_len > cfg.cap) throw CapExceeded("max_len exceeds the sign enumeration cap");
  if (multiset_count(m, cfg.max_len, cfg.multiset_cap) > cfg.multiset_cap)
    throw CapExceeded("oracle multiset enumeration cap exceeded");
  detail::Best best;
  detail::seed_singletons(X, S, best);
  detail::seed_warm(X, S, cfg.warm_starts, cfg.cap, best, 1000, cfg.tolerance);
  for (std::size_t j = 2; j <= cfg.max_len; ++j) {
    int G = std::max(1, static_cast<int>(std::floor(std::pow(static_cast<double>(cfg.grid_budget), 1.0 / j) + 1e-9)));
    G = std::min(G, std::max(cfg.grid, 1));
    std::vector<std::size_t> idx(j, 0);
    while (true) {
      auto E = detail::make_sum(X, S, idx, cfg.cap);
      std::vector<int> t(j, 1);
      std::vector<double> lam(j), arg;
      double bestF = -1;
      while (true) {
        for (std::size_t i = 0; i < j; ++i) lam[i] = t[i];
        detail::normalize(lam);
        double F = E.mean_square(lam);
        if (F > bestF) bestF = F, arg = lam;
        std::size_t pos = 0;
        while (pos < j && t[pos] == G) t[pos++] = 1;
        if (pos == j) break;
        ++t[pos];
      }
      detail::power_polish(E, arg, 1000, cfg.tolerance);
      best.consider(E.value(arg), idx, arg);
      // next nondecreasing index tuple
      std::size_t pos = j;
      while (pos > 0 && idx[pos - 1] == m - 1) --pos;
      if (pos == 0) break;
      std::size_t v = idx[pos - 1] + 1;
      for (std::size_t i = pos - 1; i < j; ++i) idx[i] = v;
    }
  }
  RadEstimate out;
  detail::finish(X, S, best, cfg.chain_ordered, out);
  return out;
}

enum class EstimatorKind { greedy, oracle };

struct EstimatorConfig {
  EstimatorKind kind = EstimatorKind::greedy;
  std::size_t max_len = 8;
  std::size_t restarts = 8;
  std::uint64_t seed = 0;
  std::size_t cap = kDefaultEnumerationCap;
  int grid = 6;
  std::size_t multiset_cap = 20000;
  bool hilbert_closed_form = true;

  std::string fingerprint() const {
    return std::string(kind == EstimatorKind::oracle ? "oracle" : "greedy") + ";max_len=" + std::to_string(max_len) +
           ";restarts=" + std::to_string(restarts) + ";seed=" + std::to_string(seed) + ";cap=" + std::to_string(cap) +
           ";grid=" + std::to_string(grid) + ";closed_form=" + (hilbert_closed_form ? "1" : "0");
  }
};

inline EstimatorKind parse_estimator(std::string_view s) {
  if (s == "greedy") return EstimatorKind::greedy;
  if (s == "oracle") return EstimatorKind::oracle;
  throw std::invalid_argument("estimator must be oracle or greedy");
}

// One entry point for both estimators; `seed` overrides cfg.seed.
inline RadEstimate estimate(const NormedSpace& X, std::span<const Vec> S, const EstimatorConfig& cfg,
                            std::uint64_t seed, std::vector<Selection> warm = {}, bool chain_ordered = false) {
  if (cfg.kind == EstimatorKind::oracle) {
    OracleConfig oc;
    oc.max_len = cfg.max_len;
    oc.grid = cfg.grid;
    oc.multiset_cap = cfg.multiset_cap;
    oc.cap = cfg.cap;
    oc.warm_starts = std::move(warm);
    oc.chain_ordered = chain_ordered;
    return rbound_oracle(X, S, oc);
  }
  LowerConfig lc;
  lc.max_len = cfg.max_len;
  lc.restarts = cfg.restarts;
  lc.seed = seed;
  lc.cap = cfg.cap;
  lc.hilbert_closed_form = cfg.hilbert_closed_form;
  lc.warm_starts = std::move(warm);
  lc.chain_ordered = chain_ordered;
  return rbound_lower(X, S, lc);
}

}  // namespace radmax
