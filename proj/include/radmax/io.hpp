#pragma once

#include <fstream>
#include <istream>
#include <map>
#include <ostream>
#include <sstream>
#include <stdexcept>
#include <string>
#include <vector>

#include "stepfn.hpp"

namespace radmax {

struct FormatError : std::runtime_error {
  using std::runtime_error::runtime_error;
};

// ---- function files (*.rmx) ----

inline void write_rmx(std::ostream& os, const StepFunction& f) {
  const auto& t = *f.tree();
  os << "RADMAX v1\n";
  os << "n=" << t.dim() << " N=" << t.depth() << " d=" << f.dim() << " norm=" << f.space().literal()
     << " measure=" << (t.is_uniform() ? "uniform" : "leafmass") << "\n";
  if (!t.is_uniform()) {
    os << "mass";
    for (double m : t.leaf_masses()) os << ' ' << format_real17(m);
    os << "\n";
  }
  os << "values\n";
  for (std::size_t l = 0; l < f.leaf_count(); ++l) {
    auto v = f.value(l);
    for (std::size_t j = 0; j < v.size(); ++j) os << (j ? " " : "") << format_real17(v[j]);
    os << "\n";
  }
}

namespace detail {

inline std::vector<std::string> split_ws(const std::string& s) {
  std::istringstream is(s);
  std::vector<std::string> out;
  for (std::string w; is >> w;) out.push_back(w);
  return out;
}

inline bool next_line(std::istream& is, std::string& line, int& lineno) {
  while (std::getline(is, line)) {
    ++lineno;
    if (!line.empty() && line.back() == '\r') line.pop_back();
    auto p = line.find_first_not_of(" \t");
    if (p == std::string::npos) continue;
    return true;
  }
  return false;
}

}  // namespace detail

inline StepFunction read_rmx(std::istream& is) {
  std::string line;
  int ln = 0;
  auto fail = [&](const std::string& why) -> FormatError {
    return FormatError("rmx line " + std::to_string(ln) + ": " + why);
  };
  if (!detail::next_line(is, line, ln) || line != "RADMAX v1") throw fail("expected 'RADMAX v1'");
  if (!detail::next_line(is, line, ln)) throw fail("missing header line");
  std::map<std::string, std::string> kv;
  for (auto& w : detail::split_ws(line)) {
    auto eq = w.find('=');
    if (eq == std::string::npos) throw fail("header token without '=': " + w);
    kv[w.substr(0, eq)] = w.substr(eq + 1);
  }
  for (const char* key : {"n", "N", "d", "norm", "measure"})
    if (!kv.count(key)) throw fail(std::string("header is missing ") + key);
  int n = 0, N = 0;
  std::size_t d = 0;
  try {
    n = std::stoi(kv["n"]);
    N = std::stoi(kv["N"]);
    d = static_cast<std::size_t>(std::stoul(kv["d"]));
  } catch (const std::exception&) {
    throw fail("bad integer in header");
  }
  NormedSpace X = parse_space(kv["norm"], d);
  const std::string measure = kv["measure"];
  if (measure != "uniform" && measure != "leafmass") throw fail("measure must be uniform or leafmass");
  if (n < 1 || N < 0 || n * N > 30) throw fail("unsupported tree shape");
  const std::size_t L = std::size_t{1} << (n * N);
  if (!detail::next_line(is, line, ln)) throw fail("missing values section");
  TreePtr tree;
  if (line.rfind("mass", 0) == 0) {
    if (measure != "leafmass") throw fail("mass line requires measure=leafmass");
    auto w = detail::split_ws(line);
    if (w.size() != L + 1) throw fail("mass line must carry 2^{nN} reals");
    std::vector<double> m;
    for (std::size_t i = 1; i < w.size(); ++i) m.push_back(parse_real(w[i]));
    tree = DyadicTree::with_masses(n, N, std::move(m));
    if (!detail::next_line(is, line, ln)) throw fail("missing values section");
  } else {
    if (measure == "leafmass") throw fail("measure=leafmass requires a mass line");
    tree = DyadicTree::lebesgue(n, N);
  }
  if (line != "values") throw fail("expected 'values'");
  std::vector<double> vals;
  vals.reserve(L * d);
  for (std::size_t l = 0; l < L; ++l) {
    if (!detail::next_line(is, line, ln)) throw fail("expected " + std::to_string(L) + " value lines");
    auto w = detail::split_ws(line);
    if (w.size() != d) throw fail("value line must carry d reals");
    for (auto& x : w) vals.push_back(parse_real(x));
  }
  if (detail::next_line(is, line, ln)) throw fail("trailing content after values");
  return StepFunction(tree, X, std::move(vals));
}

inline StepFunction read_rmx_file(const std::string& path) {
  std::ifstream is(path);
  if (!is) throw std::runtime_error("cannot open " + path);
  return read_rmx(is);
}

inline void write_rmx_file(const std::string& path, const StepFunction& f) {
  std::ofstream os(path);
  if (!os) throw std::runtime_error("cannot write " + path);
  write_rmx(os, f);
}

// ---- config files: flat `key = value`, '#' starts a comment ----

inline std::map<std::string, std::string> parse_config(std::istream& is) {
  std::map<std::string, std::string> out;
  std::string line;
  int ln = 0;
  while (std::getline(is, line)) {
    ++ln;
    if (auto h = line.find('#'); h != std::string::npos) line.erase(h);
    auto trim = [](std::string s) {
      auto a = s.find_first_not_of(" \t\r");
      if (a == std::string::npos) return std::string();
      auto b = s.find_last_not_of(" \t\r");
      return s.substr(a, b - a + 1);
    };
    line = trim(line);
    if (line.empty()) continue;
    auto eq = line.find('=');
    if (eq == std::string::npos) throw FormatError("config line " + std::to_string(ln) + ": expected key = value");
    std::string k = trim(line.substr(0, eq)), v = trim(line.substr(eq + 1));
    if (k.empty()) throw FormatError("config line " + std::to_string(ln) + ": empty key");
    out[k] = v;
  }
  return out;
}

inline std::map<std::string, std::string> read_config_file(const std::string& path) {
  std::ifstream is(path);
  if (!is) throw std::runtime_error("cannot open " + path);
  return parse_config(is);
}

// ---- CSV ----

inline std::string csv_field(const std::string& s) {
  if (s.find_first_of(",\"\r\n") == std::string::npos) return s;
  std::string out = "\"";
  for (char c : s) {
    if (c == '"') out += '"';
    out += c;
  }
  return out + "\"";
}

class Csv {
 public:
  Csv(std::string statement, std::vector<std::string> header) : cols_(header.size()) {
    os_ << "# statement: " << statement << "\n";
    row(header);
  }
  template <class... T>
  void add(const T&... xs) {
    std::vector<std::string> r;
    (r.push_back(cell(xs)), ...);
    row(r);
  }
  void row(const std::vector<std::string>& r) {
    if (r.size() != cols_) throw std::logic_error("CSV row width mismatch");
    for (std::size_t i = 0; i < r.size(); ++i) os_ << (i ? "," : "") << csv_field(r[i]);
    os_ << "\n";
  }
  std::string str() const { return os_.str(); }

  static std::string cell(const std::string& s) { return s; }
  static std::string cell(const char* s) { return s; }
  static std::string cell(double x) { return format_real(x); }
  static std::string cell(bool b) { return b ? "true" : "false"; }
  template <class I>
    requires std::is_integral_v<I>
  static std::string cell(I x) {
    return std::to_string(x);
  }

 private:
  std::size_t cols_;
  std::ostringstream os_;
};

}  // namespace radmax
