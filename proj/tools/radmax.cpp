#include <CLI11.hpp>

#include <fstream>
#include <iostream>
#include <optional>

#include "radmax/radmax.hpp"

using namespace radmax;

namespace {

struct Common {
  std::string in, out, space = "lp:2", estimator = "greedy";
  std::uint64_t seed = 1;
  int dim = 2, depth = 6, n = 1;
  std::size_t max_len = 8, restarts = 8;
  std::string corpus = "random-gaussian", measure = "uniform";
  bool dyadic = false;

  void add(CLI::App* a, bool with_in = true) {
    if (with_in) a->add_option("--in", in, "input function file (*.rmx); a seeded random function otherwise");
    a->add_option("--out", out, "output path (stdout when omitted)");
    a->add_option("--seed", seed, "run seed");
    a->add_option("--space", space, "lp:<p> with p >= 1 or inf");
    a->add_option("--dim", dim, "value dimension d");
    a->add_option("--depth", depth, "tree depth N");
    a->add_option("--n", n, "spatial dimension n");
    a->add_option("--estimator", estimator, "greedy | oracle");
    a->add_option("--max-len", max_len, "longest selection tried");
    a->add_option("--restarts", restarts, "random restarts");
    a->add_flag("--dyadic", dyadic, "generated values on the 2^-16 grid");
  }

  EstimatorConfig est() const {
    EstimatorConfig c;
    c.kind = parse_estimator(estimator);
    c.max_len = max_len;
    c.restarts = restarts;
    c.seed = seed;
    return c;
  }

  ExperimentConfig experiment_config() const {
    ExperimentConfig c;
    c.space = space;
    c.n = n;
    c.depth = depth;
    c.dim = dim;
    c.seed = seed;
    c.corpus = corpus;
    c.measure = measure;
    c.corpus_size = 1;
    c.dyadic = dyadic;
    c.estimator = est();
    return c;
  }

  StepFunction input() const {
    if (!in.empty()) return read_rmx_file(in);
    return gen_corpus(experiment_config()).front().f;
  }
};

void emit(const std::string& out, const std::string& text) {
  if (out.empty()) {
    std::cout << text;
    return;
  }
  std::ofstream os(out, std::ios::binary);
  if (!os) throw std::runtime_error("cannot write " + out);
  os << text;
}

std::string field_csv(const MaxField& F, const std::string& statement, bool with_max) {
  std::vector<std::string> head{"leaf_morton", "lower", "upper"};
  if (with_max) head.push_back("dyadic_max");
  Csv csv(statement, head);
  for (std::size_t l = 0; l < F.lower.size(); ++l) {
    if (with_max) csv.add(l, F.lower[l], F.upper[l], F.dyadic_max[l]);
    else csv.add(l, F.lower[l], F.upper[l]);
  }
  return csv.str();
}

std::string postcondition_csv(const std::string& statement, const std::vector<Postcondition>& pcs) {
  Csv csv(statement, {"postcondition", "measured", "bound", "slack", "ok"});
  for (const auto& p : pcs) csv.add(p.name, p.measured, p.bound, p.slack(), p.ok());
  return csv.str();
}

std::vector<double> parse_reals(const std::string& s) {
  std::vector<double> out;
  for (auto& x : detail::split_list(s, ',')) out.push_back(parse_real(x));
  return out;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Rademacher maximal function lab"};
  app.require_subcommand(1);

  Common rc;
  int min_level = 0;
  auto* rmf_cmd = app.add_subcommand("rmf", "Rademacher maximal field of a function");
  rc.add(rmf_cmd);
  rmf_cmd->add_option("--min-level", min_level, "coarsest level of the chain");
  rmf_cmd->add_option("--corpus", rc.corpus, "generator when --in is omitted");
  rmf_cmd->add_option("--measure", rc.measure, "uniform | nondoubling");

  Common sc;
  auto* sq_cmd = app.add_subcommand("sqfn", "dyadic square function");
  sc.add(sq_cmd);

  Common dc;
  std::string kind;
  double lambda = 1, qexp = 2;
  int dmin = 0;
  auto* dec_cmd = app.add_subcommand("decompose", "Calderon-Zygmund, Gundy or atomic decomposition");
  dc.add(dec_cmd);
  dec_cmd->add_option("kind", kind, "cz | gundy | atomic")->required()->check(CLI::IsMember({"cz", "gundy", "atomic"}));
  dec_cmd->add_option("--lambda", lambda, "height");
  dec_cmd->add_option("--min-level", dmin, "coarsest level (N0 for gundy)");
  dec_cmd->add_option("--q", qexp, "atom exponent");
  dec_cmd->add_option("--measure", dc.measure, "uniform | nondoubling");

  Common wc;
  std::string wkind, qgrid = "1.1,1.25,1.5";
  double wp = 2, gamma = 1;
  std::size_t samples = 2000;
  auto* w_cmd = app.add_subcommand("weights", "Muckenhoupt characteristics of a weight");
  wc.add(w_cmd);
  w_cmd->add_option("kind", wkind, "ap | fairshare | scan")->required()->check(CLI::IsMember({"ap", "fairshare", "scan"}));
  w_cmd->add_option("--p", wp, "exponent p");
  w_cmd->add_option("--gamma", gamma, "fair-share exponent");
  w_cmd->add_option("--samples", samples, "sampled (Q, E) pairs; exhaustive when nN <= 4");
  w_cmd->add_option("--q-grid", qgrid, "comma separated q values for scan");

  Common ec;
  std::string ename, config;
  auto* e_cmd = app.add_subcommand("experiment", "run a named experiment");
  ec.add(e_cmd, false);
  e_cmd->add_option("name", ename, "opnorm | weak-type | good-lambda | bmo | transfer | systems | paraproduct");
  e_cmd->add_option("--config", config, "flat key = value config file");
  std::vector<std::string> files;
  e_cmd->add_option("--in", files, "function files; selects the files corpus");
  std::vector<std::string> sets;
  e_cmd->add_option("--set", sets, "extra key=value overrides");

  Common gc;
  std::size_t index = 0;
  double gq = 2;
  auto* g_cmd = app.add_subcommand("gen", "write one corpus item as a function file");
  gc.add(g_cmd, false);
  g_cmd->add_option("--corpus", gc.corpus, "random-gaussian | haar-sparse | atoms | constants | l1-partial-sum");
  g_cmd->add_option("--measure", gc.measure, "uniform | nondoubling");
  g_cmd->add_option("--index", index, "item index");
  g_cmd->add_option("--q", gq, "atom exponent");

  CLI11_PARSE(app, argc, argv);

  try {
    if (rmf_cmd->parsed()) {
      auto f = rc.input();
      RmfOptions o;
      o.min_level = min_level;
      emit(rc.out, field_csv(rmf(f, rc.est(), o), "Rademacher maximal function, lower and upper certificates per leaf", true));
    } else if (sq_cmd->parsed()) {
      auto f = sc.input();
      emit(sc.out, field_csv(square_function(f, sc.est()), "dyadic square function, lower and upper certificates per leaf", false));
    } else if (dec_cmd->parsed()) {
      auto f = dc.input();
      if (kind == "cz") {
        auto r = calderon_zygmund(f, lambda, dmin);
        emit(dc.out, postcondition_csv("Calderon-Zygmund decomposition at height " + format_real(lambda), cz_postconditions(f, r)));
      } else if (kind == "gundy") {
        auto r = gundy(f, lambda, dmin);
        emit(dc.out, postcondition_csv("Gundy decomposition at height " + format_real(lambda), gundy_postconditions(f, r)));
      } else {
        auto D = atomic_decompose(f, qexp);
        emit(dc.out, postcondition_csv("atomic decomposition with q = " + format_real(qexp), atomic_postconditions(f, D)));
      }
    } else if (w_cmd->parsed()) {
      StepFunction w = wc.in.empty() ? make_weight("random", DyadicTree::lebesgue(wc.n, wc.depth), wc.seed) : read_rmx_file(wc.in);
      if (wkind == "ap") {
        Csv csv("A_p characteristic of a dyadic weight", {"p", "characteristic"});
        csv.add(wp, ap_characteristic(w, wp));
        emit(wc.out, csv.str());
      } else if (wkind == "fairshare") {
        const auto& t = *w.tree();
        auto r = t.dim() * t.depth() <= 4 ? fair_share_exhaustive(w, gamma) : fair_share_ratio(w, gamma, samples, wc.seed);
        Csv csv("fair-share ratio w(E)/w(Q) over (|E|/|Q|)^gamma", {"gamma", "ratio", "cube", "set_size", "mode"});
        csv.add(gamma, r.ratio, r.cube.literal(), r.set.size(),
                std::string(t.dim() * t.depth() <= 4 ? "exhaustive" : "sampled"));
        emit(wc.out, csv.str());
      } else {
        auto s = self_improvement_scan(w, wp, parse_reals(qgrid));
        Csv csv("A_{p/q} characteristics over a q grid", {"p", "q", "characteristic"});
        for (auto& row : s.rows) csv.add(wp, row.q, row.characteristic);
        emit(wc.out, csv.str());
      }
    } else if (e_cmd->parsed()) {
      ExperimentConfig c;
      std::map<std::string, std::string> kv;
      if (!config.empty()) kv = read_config_file(config);
      // explicit flags override the file
      auto flag = [&](const char* opt, const char* key, const std::string& v) {
        if (e_cmd->count(opt)) kv[key] = v;
      };
      flag("--out", "out", ec.out);
      flag("--seed", "seed", std::to_string(ec.seed));
      flag("--space", "space", ec.space);
      flag("--dim", "dim", std::to_string(ec.dim));
      flag("--depth", "depth", std::to_string(ec.depth));
      flag("--n", "n", std::to_string(ec.n));
      flag("--estimator", "estimator", ec.estimator);
      flag("--max-len", "max_len", std::to_string(ec.max_len));
      flag("--restarts", "restarts", std::to_string(ec.restarts));
      if (!files.empty()) {
        kv["corpus"] = "files";
        std::string joined;
        for (auto& p : files) joined += (joined.empty() ? "" : ",") + p;
        kv["files"] = joined;
      }
      for (auto& s : sets) {
        auto eq = s.find('=');
        if (eq == std::string::npos) throw std::invalid_argument("--set expects key=value");
        kv[s.substr(0, eq)] = s.substr(eq + 1);
      }
      if (!ename.empty()) kv["experiment"] = ename;
      apply_config(c, kv);
      if (c.experiment.empty()) throw std::invalid_argument("no experiment named");
      auto rep = run_experiment(c);
      emit(c.out, rep.csv);
      for (auto& [k, v] : rep.summary)
        if (k.rfind("ratio_lower_", 0) != 0) std::cerr << k << " = " << format_real(v) << "\n";
    } else if (g_cmd->parsed()) {
      auto c = gc.experiment_config();
      c.corpus_size = index + 1;
      c.q = gq;
      auto items = gen_corpus(c);
      if (index >= items.size()) throw std::out_of_range("corpus index out of range");
      std::ostringstream os;
      write_rmx(os, items[index].f);
      emit(gc.out, os.str());
    }
  } catch (const std::exception& e) {
    std::cerr << "radmax: " << e.what() << "\n";
    return 1;
  }
  return 0;
}
