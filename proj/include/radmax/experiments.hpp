#pragma once

#include <algorithm>
#include <cmath>
#include <map>
#include <set>
#include <string>
#include <vector>

#include "corpus.hpp"
#include "decomp.hpp"
#include "io.hpp"
#include "maximal.hpp"
#include "shifted.hpp"
#include "weights.hpp"

namespace radmax {

struct Report {
  std::string csv;
  std::map<std::string, double> summary;
};

// ---- helpers shared by several experiments ----

inline StepFunction make_weight(const std::string& lit, const TreePtr& t, std::uint64_t seed) {
  std::vector<double> w(t->leaf_count(), 1.0);
  if (lit == "none") return StepFunction::scalar(t, w);
  if (lit.rfind("power:", 0) == 0) {
    const double a = parse_real(lit.substr(6));
    for (std::size_t l = 0; l < w.size(); ++l) {
      auto m = t->leaf(l).coords();
      double r2 = 0;
      for (auto x : m) {
        double c = (static_cast<double>(x) + 0.5) * std::ldexp(1.0, -t->depth());
        r2 += c * c;
      }
      w[l] = std::pow(std::sqrt(r2), a);
    }
    return StepFunction::scalar(t, w);
  }
  if (lit == "random") {
    Rng rng(seed);
    for (auto& x : w) x = std::ldexp(1.0, static_cast<int>(rng() % 5) - 2);
    return StepFunction::scalar(t, w);
  }
  throw std::invalid_argument("weight must be none, power:<a> or random");
}

// Witness of an n-dimensional chain read in the one-dimensional chain (level k -> nk).
inline Selection transfer_selection(const Selection& s, int n, int min_level_1d = 0) {
  Selection out = s;
  for (auto& i : out.indices) i = i * static_cast<std::size_t>(n) - static_cast<std::size_t>(min_level_1d);
  return out;
}

// Estimates over ancestor sets {<f>_R : R contains Q} for every cube; leaves reuse the given field.
inline std::vector<std::vector<double>> ancestor_estimates(const StepFunction& f, const EstimatorConfig& cfg,
                                                           const MaxField& field) {
  const auto& t = *f.tree();
  AverageTable table(f);
  std::vector<std::vector<double>> e(t.depth() + 1);
  std::vector<std::vector<Selection>> wit(t.depth() + 1);
  for (int k = 0; k < t.depth(); ++k) {
    e[k].resize(t.cube_count(k));
    wit[k].resize(t.cube_count(k));
    for (std::size_t q = 0; q < t.cube_count(k); ++q) {
      auto [lo, hi] = t.leaf_range({t.dim(), k, q});
      auto S = chain_averages(table, t, lo, 0, k);
      std::vector<Selection> warm;
      if (k > 0) warm.push_back(wit[k - 1][q >> t.dim()]);
      auto est = estimate(f.space(), S, cfg, derive_seed(cfg.seed, (std::uint64_t(k) << 40) | q), warm, true);
      e[k][q] = est.lower;
      wit[k][q] = est.lower_witness;
      (void)hi;
    }
  }
  e[t.depth()] = field.lower;
  return e;
}

inline double set_mass(const DyadicTree& t, const std::vector<char>& in) {
  double s = 0;
  for (std::size_t l = 0; l < in.size(); ++l)
    if (in[l]) s += t.leaf_masses()[l];
  return s;
}

inline double grid_lp_norm(const GridFunction& g, double p) {
  const double cell = std::ldexp(1.0, -g.grid.dim() * g.grid.resolution());
  double s = 0;
  for (std::size_t i = 0; i < g.grid.cell_count(); ++i) {
    auto v = g.value(i);
    double a = g.space.norm_raw(v.data(), v.size());
    if (std::isinf(p)) s = std::max(s, a);
    else s += cell * std::pow(a, p);
  }
  return std::isinf(p) ? s : std::pow(s, 1.0 / p);
}

// ---- experiments ----

inline Report run_opnorm(const ExperimentConfig& c) {
  auto items = gen_corpus(c);
  const bool weighted = c.weight != "none";
  std::vector<std::string> head{"item", "tag", "space", "norm_f", "norm_rmf_lower", "norm_rmf_upper",
                                "norm_dyadic_max", "ratio_lower", "ratio_upper", "ratio_dyadic_max"};
  if (weighted)
    for (auto h : {"ap_characteristic", "w_norm_f", "w_ratio_rmf_lower", "w_ratio_m1"}) head.push_back(h);
  Csv csv("L^p boundedness of the Rademacher maximal operator (measured operator-norm ratios)", head);
  Report rep;
  double sl = 0, su = 0, sm = 0, swl = 0, swm = 0, prev = -1;
  bool monotone = true;
  for (std::size_t i = 0; i < items.size(); ++i) {
    const auto& f = items[i].f;
    auto field = rmf(f, c.estimator);
    const double nf = lp_norm(f, c.p);
    const double nl = lp_norm(field.lower_fn(), c.p), nu = lp_norm(field.upper_fn(), c.p);
    const double nm = lp_norm(StepFunction::scalar(f.tree(), field.dyadic_max), c.p);
    const double rl = nf > 0 ? nl / nf : 0, ru = nf > 0 ? nu / nf : 0, rm = nf > 0 ? nm / nf : 0;
    sl = std::max(sl, rl), su = std::max(su, ru), sm = std::max(sm, rm);
    monotone = monotone && rl >= prev;
    prev = rl;
    std::vector<std::string> row{Csv::cell(i), items[i].tag, f.space().literal(), Csv::cell(nf), Csv::cell(nl),
                                 Csv::cell(nu), Csv::cell(nm), Csv::cell(rl), Csv::cell(ru), Csv::cell(rm)};
    if (weighted) {
      auto w = make_weight(c.weight, f.tree(), derive_seed(c.seed, 1000003 + i));
      const double ap = std::isinf(c.p) || c.p <= 1 ? kInf : ap_characteristic(w, c.p);
      const double wf = lp_norm(f, c.p, &w);
      const double wl = wf > 0 ? lp_norm(field.lower_fn(), c.p, &w) / wf : 0;
      const double wm = wf > 0 ? lp_norm(power_maximal(f, 1), c.p, &w) / wf : 0;
      swl = std::max(swl, wl), swm = std::max(swm, wm);
      for (double x : {ap, wf, wl, wm}) row.push_back(Csv::cell(x));
    }
    csv.row(row);
    rep.summary["ratio_lower_" + std::to_string(i)] = rl;
  }
  std::vector<std::string> agg{"sup", "", "", "", "", "", "", Csv::cell(sl), Csv::cell(su), Csv::cell(sm)};
  if (weighted)
    for (double x : {0.0, 0.0, swl, swm}) agg.push_back(x == 0 ? "" : Csv::cell(x));
  csv.row(agg);
  rep.csv = csv.str();
  rep.summary["sup_ratio_lower"] = sl;
  rep.summary["sup_ratio_upper"] = su;
  rep.summary["sup_ratio_dyadic_max"] = sm;
  rep.summary["nondecreasing"] = monotone ? 1 : 0;
  if (weighted) rep.summary["sup_weighted_ratio_m1"] = swm;
  return rep;
}

inline Report run_weak_type(const ExperimentConfig& c) {
  auto items = gen_corpus(c);
  Csv csv("weak type (1,1) and H^1 -> weak L^1 bounds of the Rademacher maximal operator",
          {"item", "tag", "l1_norm", "h1_norm", "weak_rmf_lower", "ratio_l1", "ratio_h1", "l1_le_h1", "rmf_lower_l1",
           "rmf_upper_l1"});
  Report rep;
  double s1 = 0, sh = 0, viol = 0;
  for (std::size_t i = 0; i < items.size(); ++i) {
    const auto& f = items[i].f;
    auto field = rmf(f, c.estimator);
    const double n1 = lp_norm(f, 1), h1 = h1_norm(f), w = weak_l1(field.lower_fn());
    const double r1 = n1 > 0 ? w / n1 : 0, rh = h1 > 0 ? w / h1 : 0;
    const bool ok = n1 <= h1;
    viol += ok ? 0 : 1;
    s1 = std::max(s1, r1), sh = std::max(sh, rh);
    csv.add(i, items[i].tag, n1, h1, w, r1, rh, ok, lp_norm(field.lower_fn(), 1), lp_norm(field.upper_fn(), 1));
  }
  csv.add(std::string("sup"), std::string(""), std::string(""), std::string(""), std::string(""), s1, sh,
          viol == 0, std::string(""), std::string(""));
  rep.csv = csv.str();
  rep.summary["sup_ratio_l1"] = s1;
  rep.summary["sup_ratio_h1"] = sh;
  rep.summary["h1_violations"] = viol;
  return rep;
}

struct GoodLambdaItem {
  std::size_t lambdas = 0;
  std::size_t violations = 0;
  std::vector<double> max_ratio;  // per delta
};

inline GoodLambdaItem good_lambda_item(const StepFunction& f, const EstimatorConfig& cfg, double q,
                                       const std::vector<double>& deltas) {
  const auto& t = *f.tree();
  auto field = rmf(f, cfg);
  auto Mq = power_maximal(f, q).values();
  auto e = ancestor_estimates(f, cfg, field);
  const auto& lw = field.lower;
  std::set<double> lam;
  for (double v : lw)
    if (v > 0) lam.insert(v), lam.insert(v / 2);
  for (auto& lev : e)
    for (double v : lev)
      if (v > 0) lam.insert(v);
  GoodLambdaItem out;
  out.max_ratio.assign(deltas.size(), 0.0);
  std::vector<char> covered(t.leaf_count());
  for (double L : lam) {
    ++out.lambdas;
    auto cubes = t.maximal_cubes([&](const Cube& Q) { return e[Q.level][Q.morton] > L; });
    std::fill(covered.begin(), covered.end(), 0);
    for (const auto& Q : cubes) {
      auto [lo, hi] = t.leaf_range(Q);
      std::fill(covered.begin() + lo, covered.begin() + hi, 1);
    }
    for (std::size_t l = 0; l < t.leaf_count(); ++l)
      if (lw[l] > 2 * L && !covered[l]) ++out.violations;
  }
  // constant table, with the M_q breakpoints of each delta added to the sweep
  for (std::size_t di = 0; di < deltas.size(); ++di) {
    const double delta = deltas[di];
    std::set<double> sweep = lam;
    for (double v : Mq)
      if (v > 0) sweep.insert(v / delta);
    for (double L : sweep) {
      double num = 0, den = 0;
      for (std::size_t l = 0; l < t.leaf_count(); ++l) {
        const double m = t.leaf_masses()[l];
        if (lw[l] > L) den += m;
        if (lw[l] > 2 * L && Mq[l] <= delta * L) num += m;
      }
      if (den > 0) out.max_ratio[di] = std::max(out.max_ratio[di], num / den);
    }
  }
  return out;
}

inline Report run_good_lambda(const ExperimentConfig& c) {
  auto items = gen_corpus(c);
  Csv csv("good-lambda inequality between the Rademacher maximal function and M_q",
          {"item", "tag", "q", "delta", "lambda_count", "containment_violations", "max_ratio", "constant"});
  Report rep;
  std::vector<double> sup(c.deltas.size(), 0.0);
  double viol = 0, lambdas = 0;
  for (double d : c.deltas)
    if (!(d > 0 && d < 1)) throw std::invalid_argument("deltas must lie in (0,1)");
  for (std::size_t i = 0; i < items.size(); ++i) {
    auto g = good_lambda_item(items[i].f, c.estimator, c.q, c.deltas);
    viol += static_cast<double>(g.violations);
    lambdas += static_cast<double>(g.lambdas);
    for (std::size_t di = 0; di < c.deltas.size(); ++di) {
      const double d = c.deltas[di], k = g.max_ratio[di] / (d / (1 - d));
      sup[di] = std::max(sup[di], k);
      csv.add(i, items[i].tag, c.q, d, g.lambdas, g.violations, g.max_ratio[di], k);
    }
  }
  bool finite = true;
  for (std::size_t di = 0; di < c.deltas.size(); ++di) {
    finite = finite && std::isfinite(sup[di]);
    csv.add(std::string("sup"), std::string(""), c.q, c.deltas[di], std::string(""), static_cast<std::size_t>(viol),
            std::string(""), sup[di]);
    rep.summary["constant_delta_" + format_real(c.deltas[di])] = sup[di];
  }
  rep.csv = csv.str();
  rep.summary["containment_violations"] = viol;
  rep.summary["lambda_count"] = lambdas;
  rep.summary["constants_finite"] = finite ? 1 : 0;
  return rep;
}

inline Report run_bmo(const ExperimentConfig& c) {
  auto items = gen_corpus(c);
  Csv csv("BMO boundedness of the Rademacher maximal function and the c_Q sandwich",
          {"item", "tag", "bmo_f", "bmo_rmf_lower", "ratio", "status", "sandwich_checks", "lower_violations",
           "upper_violations", "worst_lower_margin", "worst_upper_margin"});
  Report rep;
  double sup = 0, lv = 0, uv = 0, checks = 0;
  for (std::size_t i = 0; i < items.size(); ++i) {
    const auto& f = items[i].f;
    auto field = rmf(f, c.estimator);
    const double bf = bmo_norm(f, 1, Centering::average);
    const double br = bmo_norm(field.lower_fn(), 1, Centering::optimal);
    // oscillation at rounding level counts as a constant: 0/0
    const bool live = bf > 1e-12 * lp_norm(f, kInf);
    std::string status = live ? "measured" : "skipped";
    const double ratio = live ? br / bf : 0;
    if (live) sup = std::max(sup, ratio);
    std::vector<std::string> row{Csv::cell(i), items[i].tag, Csv::cell(bf), Csv::cell(br),
                                 live ? Csv::cell(ratio) : std::string(""), status};
    if (f.tree()->dim() == 1 && f.tree()->depth() <= 4) {
      EstimatorConfig oc = c.estimator;
      oc.kind = EstimatorKind::oracle;
      oc.max_len = std::min(oc.max_len, c.sandwich_max_len);
      oc.grid = std::min(oc.grid, 4);
      auto s = bmo_sandwich(f, oc);
      checks += static_cast<double>(s.checks);
      lv += static_cast<double>(s.lower_violations);
      uv += static_cast<double>(s.upper_violations);
      for (auto x : {Csv::cell(s.checks), Csv::cell(s.lower_violations), Csv::cell(s.upper_violations),
                     Csv::cell(s.worst_lower_margin), Csv::cell(s.worst_upper_margin)})
        row.push_back(x);
    } else {
      for (int k = 0; k < 5; ++k) row.push_back("");
    }
    csv.row(row);
  }
  csv.add(std::string("sup"), std::string(""), std::string(""), std::string(""), sup, std::string(""),
          static_cast<std::size_t>(checks), static_cast<std::size_t>(lv), static_cast<std::size_t>(uv),
          std::string(""), std::string(""));
  rep.csv = csv.str();
  rep.summary["sup_ratio"] = sup;
  rep.summary["sandwich_checks"] = checks;
  rep.summary["sandwich_lower_violations"] = lv;
  rep.summary["sandwich_upper_violations"] = uv;
  return rep;
}

// Bijectivity and two-way inclusion preservation of phi on all cubes of levels <= kmax.
inline std::size_t interleave_order_violations(int n, int kmax) {
  std::size_t bad = 0;
  std::vector<Cube> all;
  for (int k = 0; k <= kmax; ++k) {
    std::set<std::uint64_t> seen;
    for (std::uint64_t i = 0; i < (std::uint64_t{1} << (n * k)); ++i) {
      Cube q{n, k, i};
      Cube I = interleave(q);
      if (I.level != n * k || I.morton >= (std::uint64_t{1} << (n * k)) || !seen.insert(I.morton).second) ++bad;
      if (deinterleave(I, n) != q) ++bad;
      if (I.volume() != q.volume()) ++bad;
      all.push_back(q);
    }
    if (seen.size() != (std::size_t{1} << (n * k))) ++bad;
  }
  for (const auto& a : all)
    for (const auto& b : all)
      if (a.contains(b) != interleave(a).contains(interleave(b))) ++bad;
  return bad;
}

inline Report run_transfer(const ExperimentConfig& c) {
  auto items = gen_corpus(c);
  Csv csv("dimension transfer through the Morton map (averages, L^p norms, Rademacher maximal function)",
          {"item", "tag", "n", "depth", "average_slack", "norm_f", "norm_transfer", "norm_slack", "rmf_norm_n",
           "rmf_norm_1", "rmf_margin"});
  Report rep;
  double avs = 0, ns = 0, worst = kInf;
  for (std::size_t i = 0; i < items.size(); ++i) {
    const auto& f = items[i].f;
    const auto& t = *f.tree();
    const int n = t.dim();
    StepFunction g(transfer_tree(t), f.space(), f.values());
    AverageTable A(f), B(g);
    double slack = 0;
    for (int k = 0; k <= t.depth(); ++k)
      for (std::size_t q = 0; q < t.cube_count(k); ++q) {
        Cube I = interleave({n, k, q});
        auto a = A.at(k, q), b = B.at(I);
        for (std::size_t j = 0; j < a.size(); ++j) slack = std::max(slack, std::abs(a[j] - b[j]));
      }
    const double nf = lp_norm(f, c.p), ng = lp_norm(g, c.p);
    RmfOptions on;
    on.keep_estimates = true;
    auto Fn = rmf(f, c.estimator, on);
    RmfOptions o1;
    o1.warm = [&](std::size_t leaf) { return std::vector<Selection>{transfer_selection(Fn.estimates[leaf].lower_witness, n)}; };
    auto F1 = rmf(g, c.estimator, o1);
    const double rn = lp_norm(Fn.lower_fn(), c.p), r1 = lp_norm(F1.lower_fn(), c.p);
    avs = std::max(avs, slack);
    ns = std::max(ns, std::abs(nf - ng));
    worst = std::min(worst, r1 - rn);
    csv.add(i, items[i].tag, n, t.depth(), slack, nf, ng, std::abs(nf - ng), rn, r1, r1 - rn);
  }
  const std::size_t order = interleave_order_violations(c.n, std::min(c.depth, 3));
  csv.add(std::string("sup"), std::string(""), c.n, std::string(""), avs, std::string(""), std::string(""), ns,
          std::string(""), std::string(""), worst);
  rep.csv = csv.str();
  rep.summary["average_slack"] = avs;
  rep.summary["norm_slack"] = ns;
  rep.summary["worst_rmf_margin"] = worst;
  rep.summary["order_violations"] = static_cast<double>(order);
  return rep;
}

inline ShiftedSystem parse_beta(const std::string& lit, int n, int M, Rng& rng) {
  if (lit == "random") return ShiftedSystem::random(n, M, rng);
  if (lit == "zero" || lit.empty()) return ShiftedSystem(n, M, {});
  std::map<int, std::vector<int>> beta;
  for (auto& part : detail::split_list(lit, ';')) {
    auto colon = part.find(':');
    if (colon == std::string::npos) throw std::invalid_argument("beta entries look like j:bits");
    int j = std::stoi(part.substr(0, colon));
    std::vector<int> b;
    for (char ch : part.substr(colon + 1)) {
      if (ch != '0' && ch != '1') throw std::invalid_argument("beta bits must be 0 or 1");
      b.push_back(ch - '0');
    }
    beta[j] = b;
  }
  return ShiftedSystem(n, M, beta);
}

inline std::string beta_literal(const ShiftedSystem& s) {
  std::string out;
  for (auto& [j, b] : s.beta()) {
    if (!out.empty()) out += ';';
    out += std::to_string(j) + ':';
    for (int x : b) out += static_cast<char>('0' + x);
  }
  return out.empty() ? "zero" : out;
}

struct SystemsCheck {
  std::size_t identity_mismatches = 0;  // entries where the two routes differ
  std::size_t composition_mismatches = 0;
  double rmf_max_diff = 0;
  std::size_t rmf_cells = 0;
  double norm_f = 0, norm_translated = 0;
};

inline SystemsCheck systems_item(const StepFunction& f, const ShiftedSystem& sys, int T, const EstimatorConfig& cfg,
                                 double p, bool with_rmf = true) {
  const int M = sys.resolution();
  SystemsCheck out;
  GridFunction F = embed(f, M);
  for (int k = T; k <= M; ++k) {
    auto a = shifted_average(sys, k, F);
    auto b = conjugated_average(sys, T, k, F);
    for (std::size_t i = 0; i < a.values.size(); ++i) out.identity_mismatches += a.values[i] != b.values[i];
  }
  // tau_{k-1} = sigma_k tau_k on an indicator of a random-ish leaf cube
  GridFunction ind(F.grid, NormedSpace::scalar());
  {
    std::vector<std::int64_t> a(F.grid.dim());
    const std::int64_t side = std::int64_t{1} << std::max(0, M - f.tree()->depth());
    for (std::size_t idx = 0; idx < F.grid.cell_count(); ++idx) {
      a = F.grid.corner(idx);
      bool in = true;
      for (auto x : a) in = in && x >= 0 && x < side;
      ind.values[idx] = in ? 1.0 : 0.0;
    }
  }
  for (int k = 1; k <= M; ++k) {
    auto lhs = translate(translate(ind, sys.shift(k)), sys.sigma(k));
    auto rhs = translate(ind, sys.shift(k - 1));
    for (std::size_t i = 0; i < lhs.values.size(); ++i) out.composition_mismatches += lhs.values[i] != rhs.values[i];
  }
  auto sT = sys.shift(T);
  auto G = translate(F, sT);
  out.norm_f = grid_lp_norm(F, p);
  out.norm_translated = grid_lp_norm(G, p);
  if (with_rmf) {
    std::vector<GridFunction> direct, conj;
    for (int k = T; k <= M; ++k) {
      direct.push_back(shifted_average(sys, k, F));
      conj.push_back(standard_average(k, G));
    }
    const auto& grid = F.grid;
    std::vector<std::int64_t> a;
    for (std::size_t idx = 0; idx < grid.cell_count(); ++idx) {
      std::vector<Vec> S1, S2;
      a = grid.corner(idx);
      std::vector<std::int64_t> y = a;
      for (std::size_t i = 0; i < y.size(); ++i) y[i] -= sT[i];
      if (!grid.inside(y)) continue;
      const std::size_t yi = grid.index(y);
      for (std::size_t k = 0; k < direct.size(); ++k) {
        auto u = direct[k].value(idx), v = conj[k].value(yi);
        S1.emplace_back(u.begin(), u.end());
        S2.emplace_back(v.begin(), v.end());
      }
      auto e1 = estimate(f.space(), S1, cfg, cfg.seed ^ idx, {}, true);
      auto e2 = estimate(f.space(), S2, cfg, cfg.seed ^ idx, {}, true);
      out.rmf_max_diff = std::max(out.rmf_max_diff, std::abs(e1.lower - e2.lower));
      ++out.rmf_cells;
    }
  }
  return out;
}

inline Report run_systems(const ExperimentConfig& c) {
  auto items = gen_corpus(c);
  const int M = c.resolution >= 0 ? c.resolution : c.depth + 2;
  Csv csv("conjugation of shifted dyadic systems and L^p boundedness in any dyadic system",
          {"item", "tag", "beta", "truncation", "resolution", "identity_mismatches", "composition_mismatches",
           "rmf_cells", "rmf_max_diff", "norm_f", "norm_translated", "norm_slack"});
  Report rep;
  double idm = 0, cm = 0, rd = 0, ns = 0;
  for (std::size_t i = 0; i < items.size(); ++i) {
    Rng rng(derive_seed(c.seed, 7000003 + i));
    auto sys = parse_beta(c.beta, items[i].f.tree()->dim(), M, rng);
    auto s = systems_item(items[i].f, sys, c.truncation, c.estimator, c.p);
    idm += static_cast<double>(s.identity_mismatches);
    cm += static_cast<double>(s.composition_mismatches);
    rd = std::max(rd, s.rmf_max_diff);
    ns = std::max(ns, std::abs(s.norm_f - s.norm_translated));
    csv.add(i, items[i].tag, beta_literal(sys), c.truncation, M, s.identity_mismatches, s.composition_mismatches,
            s.rmf_cells, s.rmf_max_diff, s.norm_f, s.norm_translated, std::abs(s.norm_f - s.norm_translated));
  }
  rep.csv = csv.str();
  rep.summary["identity_mismatches"] = idm;
  rep.summary["composition_mismatches"] = cm;
  rep.summary["rmf_max_diff"] = rd;
  rep.summary["norm_slack"] = ns;
  return rep;
}

// max over cubes and theta of |<Pi_b f, h> - <f>_Q <b, h>|
inline double paraproduct_identity_slack(const StepFunction& b, const StepFunction& f, const StepFunction& pi) {
  auto Hp = haar_decompose(pi), Hb = haar_decompose(b);
  AverageTable table(f);
  const auto& t = *f.tree();
  const unsigned nc = 1u << t.dim();
  double s = 0;
  for (double x : Hp.root_average) s = std::max(s, std::abs(x));
  for (int k = 0; k < t.depth(); ++k)
    for (std::size_t q = 0; q < t.cube_count(k); ++q) {
      Cube Q{t.dim(), k, q};
      auto a = table.at(k, q);
      for (unsigned th = 1; th < nc; ++th) {
        auto c = Hp.at(Q, th);
        const double bb = Hb.at(Q, th)[0];
        for (std::size_t j = 0; j < a.size(); ++j) s = std::max(s, std::abs(c[j] - a[j] * bb));
      }
    }
  return s;
}

inline Report run_paraproduct(const ExperimentConfig& c) {
  auto items = gen_corpus(c);
  Csv csv("paraproduct bound by BMO norm of the symbol times the Rademacher maximal function",
          {"item", "tag", "identity_slack", "norm_S_lower", "norm_S_upper", "bmo_b", "norm_rmf_lower", "rhs",
           "ratio"});
  Report rep;
  double slack = 0, sup = 0;
  for (std::size_t i = 0; i < items.size(); ++i) {
    const auto& f = items[i].f;
    Rng rng(derive_seed(c.seed, 9000011 + i));
    auto b = random_function(f.tree(), NormedSpace::scalar(), rng, c.dyadic);
    auto pi = paraproduct(b, f);
    const double s = paraproduct_identity_slack(b, f, pi);
    auto S = square_function(pi, c.estimator);
    const double sl = lp_norm(S.lower_fn(), c.p), su = lp_norm(S.upper_fn(), c.p);
    const double bb = bmo_norm(b, 1, Centering::average);
    const double rm = lp_norm(rmf(f, c.estimator).lower_fn(), c.p);
    const double rhs = bb * rm, ratio = rhs > 0 ? su / rhs : 0;
    slack = std::max(slack, s);
    sup = std::max(sup, ratio);
    csv.add(i, items[i].tag, s, sl, su, bb, rm, rhs, ratio);
  }
  csv.add(std::string("sup"), std::string(""), slack, std::string(""), std::string(""), std::string(""),
          std::string(""), std::string(""), sup);
  rep.csv = csv.str();
  rep.summary["identity_slack"] = slack;
  rep.summary["sup_ratio"] = sup;
  return rep;
}

inline Report run_experiment(const ExperimentConfig& c) {
  if (c.experiment == "opnorm") return run_opnorm(c);
  if (c.experiment == "weak-type") return run_weak_type(c);
  if (c.experiment == "good-lambda") return run_good_lambda(c);
  if (c.experiment == "bmo") return run_bmo(c);
  if (c.experiment == "transfer") return run_transfer(c);
  if (c.experiment == "systems") return run_systems(c);
  if (c.experiment == "paraproduct") return run_paraproduct(c);
  throw std::invalid_argument("unknown experiment '" + c.experiment + "'");
}

}  // namespace radmax
