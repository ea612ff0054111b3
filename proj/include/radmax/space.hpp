#pragma once

#include <charconv>
#include <cmath>
#include <cstddef>
#include <limits>
#include <span>
#include <stdexcept>
#include <string>
#include <string_view>
#include <vector>

namespace radmax {

using Vec = std::vector<double>;

inline constexpr double kInf = std::numeric_limits<double>::infinity();

// Shortest decimal that round-trips.
inline std::string format_real(double x) {
  if (std::isinf(x)) return x > 0 ? "inf" : "-inf";
  char buf[64];
  auto r = std::to_chars(buf, buf + sizeof buf, x);
  return std::string(buf, r.ptr);
}

// Fixed 17 significant digits, used by the function file format.
inline std::string format_real17(double x) {
  char buf[64];
  auto r = std::to_chars(buf, buf + sizeof buf, x, std::chars_format::general, 17);
  return std::string(buf, r.ptr);
}

inline double parse_real(std::string_view s) {
  while (!s.empty() && (s.front() == ' ' || s.front() == '\t')) s.remove_prefix(1);
  while (!s.empty() && (s.back() == ' ' || s.back() == '\t' || s.back() == '\r')) s.remove_suffix(1);
  if (s == "inf" || s == "+inf") return kInf;
  if (s == "-inf") return -kInf;
  if (!s.empty() && s.front() == '+') s.remove_prefix(1);
  double v = 0;
  auto r = std::from_chars(s.data(), s.data() + s.size(), v);
  if (s.empty() || r.ec != std::errc() || r.ptr != s.data() + s.size())
    throw std::invalid_argument("not a real number: '" + std::string(s) + "'");
  return v;
}

// ell^p_d with runtime exponent; p = +inf is its own branch.
class NormedSpace {
 public:
  NormedSpace() = default;
  NormedSpace(std::size_t dim, double p) : dim_(dim), p_(p) {
    if (dim == 0) throw std::invalid_argument("space dimension must be positive");
    if (!(p >= 1.0)) throw std::invalid_argument("exponent must satisfy p >= 1");
  }
  static NormedSpace scalar() { return NormedSpace(1, 2.0); }

  std::size_t dim() const { return dim_; }
  double exponent() const { return p_; }
  bool is_inf() const { return std::isinf(p_); }
  bool is_hilbert() const { return p_ == 2.0 || dim_ == 1; }

  double norm(std::span<const double> v) const {
    if (v.size() != dim_) throw std::invalid_argument("dimension mismatch in norm");
    for (double x : v)
      if (!std::isfinite(x)) throw std::invalid_argument("non-finite entry in norm");
    return norm_raw(v.data(), dim_);
  }

  // No validation; `len` may differ from dim() for compressed representations.
  double norm_raw(const double* v, std::size_t len) const {
    if (is_inf()) {
      double m = 0;
      for (std::size_t i = 0; i < len; ++i) m = std::max(m, std::abs(v[i]));
      return m;
    }
    if (p_ == 1.0) {
      double s = 0;
      for (std::size_t i = 0; i < len; ++i) s += std::abs(v[i]);
      return s;
    }
    if (p_ == 2.0) {
      double s = 0;
      for (std::size_t i = 0; i < len; ++i) s += v[i] * v[i];
      return std::sqrt(s);
    }
    double s = 0;
    for (std::size_t i = 0; i < len; ++i) s += std::pow(std::abs(v[i]), p_);
    return std::pow(s, 1.0 / p_);
  }

  std::string literal() const { return "lp:" + format_real(p_); }

  bool operator==(const NormedSpace&) const = default;

 private:
  std::size_t dim_ = 1;
  double p_ = 2.0;
};

inline double parse_exponent(std::string_view s) {
  double p = parse_real(s);
  if (!(p >= 1.0)) throw std::invalid_argument("exponent must satisfy p >= 1");
  return p;
}

// "lp:<p>" or "lp:inf".
inline NormedSpace parse_space(std::string_view lit, std::size_t dim) {
  if (lit.substr(0, 3) != "lp:") throw std::invalid_argument("space literal must look like lp:<p>");
  return NormedSpace(dim, parse_exponent(lit.substr(3)));
}

}  // namespace radmax
