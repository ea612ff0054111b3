#pragma once

#include <cmath>
#include <cstdint>
#include <functional>
#include <memory>
#include <span>
#include <stdexcept>
#include <string>
#include <string_view>
#include <vector>

#include "space.hpp"

namespace radmax {

// Morton code of integer coordinates at a given level; within each level
// the child digit is d_1 2^{n-1} + ... + d_n 2^0.
inline std::uint64_t morton_encode(std::span<const std::uint64_t> m, int level) {
  const int n = static_cast<int>(m.size());
  std::uint64_t code = 0;
  for (int b = level - 1; b >= 0; --b) {
    std::uint64_t digit = 0;
    for (int i = 0; i < n; ++i) digit = (digit << 1) | ((m[i] >> b) & 1u);
    code = (code << n) | digit;
  }
  return code;
}

inline std::vector<std::uint64_t> morton_decode(std::uint64_t code, int n, int level) {
  std::vector<std::uint64_t> m(n, 0);
  for (int b = 0; b < level; ++b) {
    std::uint64_t digit = (code >> (n * b)) & ((1ULL << n) - 1);
    for (int i = 0; i < n; ++i) m[i] |= ((digit >> (n - 1 - i)) & 1u) << b;
  }
  return m;
}

inline constexpr int kMaxBits = 62;

struct Cube {
  int n = 1;
  int level = 0;
  std::uint64_t morton = 0;

  static Cube root(int n) { return {n, 0, 0}; }

  static Cube from_coords(std::span<const std::uint64_t> m, int level) {
    const int n = static_cast<int>(m.size());
    if (n < 1) throw std::invalid_argument("cube dimension must be positive");
    if (n * level > kMaxBits) throw std::out_of_range("cube level too deep");
    for (auto x : m)
      if (x >> level) throw std::out_of_range("cube coordinate outside the unit cube");
    return {n, level, morton_encode(m, level)};
  }

  std::vector<std::uint64_t> coords() const { return morton_decode(morton, n, level); }

  Cube parent() const {
    if (level == 0) throw std::logic_error("level-0 cube has no parent");
    return {n, level - 1, morton >> n};
  }

  Cube child(unsigned digit) const {
    if (digit >= (1u << n)) throw std::out_of_range("child digit out of range");
    if (n * (level + 1) > kMaxBits) throw std::out_of_range("cube level too deep");
    return {n, level + 1, (morton << n) | digit};
  }

  std::vector<Cube> children() const {
    std::vector<Cube> out;
    for (unsigned d = 0; d < (1u << n); ++d) out.push_back(child(d));
    return out;
  }

  // Ancestor at level k <= level.
  Cube ancestor(int k) const {
    if (k < 0 || k > level) throw std::out_of_range("ancestor level out of range");
    return {n, k, morton >> (n * (level - k))};
  }

  bool contains(const Cube& r) const {
    return r.n == n && r.level >= level && (r.morton >> (n * (r.level - level))) == morton;
  }

  double volume() const { return std::ldexp(1.0, -n * level); }

  // Interval [lo, lo + side) per axis.
  double side() const { return std::ldexp(1.0, -level); }

  std::string literal() const { return "n" + std::to_string(level) + ":" + std::to_string(morton); }

  bool operator==(const Cube&) const = default;
  auto operator<=>(const Cube&) const = default;
};

// "n<k>:<morton-index>"; the dimension comes from context.
inline Cube parse_cube(std::string_view lit, int n) {
  auto colon = lit.find(':');
  if (lit.empty() || lit[0] != 'n' || colon == std::string_view::npos)
    throw std::invalid_argument("cube literal must look like n<k>:<morton-index>");
  int k = std::stoi(std::string(lit.substr(1, colon - 1)));
  std::uint64_t m = std::stoull(std::string(lit.substr(colon + 1)));
  if (k < 0 || n * k > kMaxBits || (n * k < 64 && (m >> (n * k)) != 0))
    throw std::out_of_range("cube literal outside the unit cube");
  return {n, k, m};
}

// phi: n-dimensional cube of level k -> dyadic interval of level nk.
inline Cube interleave(const Cube& q) { return {1, q.n * q.level, q.morton}; }

inline Cube deinterleave(const Cube& interval, int n) {
  if (interval.n != 1) throw std::invalid_argument("deinterleave expects an interval");
  if (interval.level % n != 0) throw std::invalid_argument("interval level not divisible by n");
  return {n, interval.level / n, interval.morton};
}

class DyadicTree {
 public:
  static std::shared_ptr<const DyadicTree> lebesgue(int n, int depth) {
    check_shape(n, depth);
    std::vector<double> m(std::size_t{1} << (n * depth), std::ldexp(1.0, -n * depth));
    return std::shared_ptr<const DyadicTree>(new DyadicTree(n, depth, std::move(m), true));
  }

  static std::shared_ptr<const DyadicTree> with_masses(int n, int depth, std::vector<double> leaf_mass) {
    check_shape(n, depth);
    if (leaf_mass.size() != (std::size_t{1} << (n * depth)))
      throw std::invalid_argument("leaf mass count must be 2^{nN}");
    const double u = std::ldexp(1.0, -n * depth);
    bool uniform = true;
    for (double x : leaf_mass) {
      if (!std::isfinite(x) || x < 0) throw std::invalid_argument("leaf masses must be finite and nonnegative");
      uniform = uniform && x == u;
    }
    return std::shared_ptr<const DyadicTree>(new DyadicTree(n, depth, std::move(leaf_mass), uniform));
  }

  int dim() const { return n_; }
  int depth() const { return depth_; }
  bool is_uniform() const { return uniform_; }
  std::size_t leaf_count() const { return std::size_t{1} << (n_ * depth_); }
  std::size_t cube_count(int level) const { return std::size_t{1} << (n_ * level); }

  const std::vector<double>& leaf_masses() const { return mass_.back(); }
  const std::vector<double>& level_masses(int level) const { return mass_.at(level); }

  double mass(const Cube& q) const {
    check_cube(q);
    return mass_[q.level][q.morton];
  }
  double mass(int level, std::size_t index) const { return mass_[level][index]; }
  double total_mass() const { return mass_[0][0]; }

  void check_cube(const Cube& q) const {
    if (q.n != n_ || q.level < 0 || q.level > depth_ || q.morton >= cube_count(q.level))
      throw std::out_of_range("cube " + q.literal() + " is not in the tree");
  }

  // Leaves of q occupy [first, last) in Morton order.
  std::pair<std::size_t, std::size_t> leaf_range(const Cube& q) const {
    check_cube(q);
    const int shift = n_ * (depth_ - q.level);
    return {static_cast<std::size_t>(q.morton) << shift, static_cast<std::size_t>(q.morton + 1) << shift};
  }

  Cube leaf(std::size_t i) const {
    if (i >= leaf_count()) throw std::out_of_range("leaf index out of range");
    return {n_, depth_, i};
  }

  // Index of the level-k cube containing leaf i.
  std::size_t cube_of(std::size_t leaf, int k) const { return leaf >> (n_ * (depth_ - k)); }

  std::vector<Cube> chain(std::size_t leaf_index) const {
    Cube l = leaf(leaf_index);
    std::vector<Cube> out;
    for (int k = 0; k <= depth_; ++k) out.push_back(l.ancestor(k));
    return out;
  }

  std::vector<Cube> cubes(int level) const {
    std::vector<Cube> out;
    for (std::size_t i = 0; i < cube_count(level); ++i) out.push_back({n_, level, i});
    return out;
  }

  // Marked cubes with no marked strict ancestor at level >= min_level, in Morton order.
  std::vector<Cube> maximal_cubes(const std::function<bool(const Cube&)>& marked, int min_level = 0) const {
    if (min_level < 0 || min_level > depth_) throw std::out_of_range("min_level out of range");
    std::vector<Cube> out;
    std::function<void(const Cube&)> visit = [&](const Cube& q) {
      if (marked(q)) {
        out.push_back(q);
        return;
      }
      if (q.level < depth_)
        for (unsigned d = 0; d < (1u << n_); ++d) visit(q.child(d));
    };
    for (std::size_t i = 0; i < cube_count(min_level); ++i) visit({n_, min_level, i});
    return out;
  }

 private:
  static void check_shape(int n, int depth) {
    if (n < 1) throw std::invalid_argument("dimension must be positive");
    if (depth < 0) throw std::invalid_argument("depth must be nonnegative");
    if (n * depth > 30) throw std::invalid_argument("tree too large (n*N > 30)");
  }

  DyadicTree(int n, int depth, std::vector<double> leaves, bool uniform) : n_(n), depth_(depth), uniform_(uniform) {
    mass_.resize(depth + 1);
    mass_[depth] = std::move(leaves);
    // sequential sums over Morton ranges, so mu(Q) does not depend on the dimension split
    const auto& lm = mass_[depth];
    for (int k = depth - 1; k >= 0; --k) {
      const std::size_t per = std::size_t{1} << (n * (depth - k));
      mass_[k].assign(std::size_t{1} << (n * k), 0.0);
      for (std::size_t i = 0; i < mass_[k].size(); ++i) {
        double s = 0;
        for (std::size_t j = i * per; j < (i + 1) * per; ++j) s += lm[j];
        mass_[k][i] = s;
      }
    }
  }

  int n_;
  int depth_;
  bool uniform_;
  std::vector<std::vector<double>> mass_;
};

using TreePtr = std::shared_ptr<const DyadicTree>;

// Same leaf masses read as a one-dimensional tree of depth nN.
inline TreePtr transfer_tree(const DyadicTree& t) {
  if (t.is_uniform()) return DyadicTree::lebesgue(1, t.dim() * t.depth());
  return DyadicTree::with_masses(1, t.dim() * t.depth(), t.leaf_masses());
}

}  // namespace radmax
