#pragma once

// Uniform grids on the simplex of two or three states and piecewise-linear
// fields on them.

#include <algorithm>
#include <array>
#include <cmath>
#include <cstddef>
#include <utility>
#include <vector>

#include "persuade/error.hpp"
#include "persuade/hull.hpp"
#include "persuade/model.hpp"

namespace persuade {

/// Nodes are the beliefs whose coordinates are multiples of 1/n. For two
/// states node i is ((n - i)/n, i/n); for three states node (i, j) is
/// ((n - i - j)/n, i/n, j/n). Cells of the three-state grid are the
/// triangles {(i,j), (i+1,j), (i,j+1)} and {(i+1,j), (i,j+1), (i+1,j+1)}.
class SimplexGrid {
 public:
  SimplexGrid(std::size_t states, std::size_t n) : states_(states), n_(n) {
    require(states == 2 || states == 3, ErrorCode::invalid_argument, "grids support two or three states");
    require(n >= 1, ErrorCode::invalid_argument, "grid resolution must be positive");
  }

  /// Grid with spacing closest to h.
  static SimplexGrid with_spacing(std::size_t states, double h) {
    require(h > 0.0 && h <= 1.0, ErrorCode::invalid_argument, "grid spacing must lie in (0,1]");
    return {states, static_cast<std::size_t>(std::llround(1.0 / h))};
  }

  std::size_t states() const noexcept { return states_; }
  std::size_t resolution() const noexcept { return n_; }
  double spacing() const noexcept { return 1.0 / static_cast<double>(n_); }

  std::size_t size() const noexcept { return states_ == 2 ? n_ + 1 : (n_ + 1) * (n_ + 2) / 2; }

  std::size_t index(std::size_t i, std::size_t j = 0) const {
    if (states_ == 2) return i;
    return i * (n_ + 1) - i * (i - 1) / 2 + j;
  }

  /// Lattice coordinates (i, j) of a node.
  LatticePoint lattice(std::size_t node) const {
    if (states_ == 2) return {static_cast<std::int64_t>(node), 0};
    std::size_t i = 0;
    while (node >= n_ + 1 - i) {
      node -= n_ + 1 - i;
      ++i;
    }
    return {static_cast<std::int64_t>(i), static_cast<std::int64_t>(node)};
  }

  Belief node(std::size_t k) const {
    const LatticePoint l = lattice(k);
    const double n = static_cast<double>(n_);
    if (states_ == 2) return Belief::normalized({(n - static_cast<double>(l.x)) / n, static_cast<double>(l.x) / n});
    return Belief::normalized({(n - static_cast<double>(l.x + l.y)) / n, static_cast<double>(l.x) / n,
                               static_cast<double>(l.y) / n});
  }

  std::vector<Belief> nodes() const {
    std::vector<Belief> out;
    out.reserve(size());
    for (std::size_t k = 0; k < size(); ++k) out.push_back(node(k));
    return out;
  }

  /// Continuous lattice coordinates of a belief.
  std::array<double, 2> chart(const Belief& p) const {
    require(p.size() == states_, ErrorCode::invalid_argument, "belief dimension differs from the grid");
    const double n = static_cast<double>(n_);
    if (states_ == 2) return {p[1] * n, 0.0};
    return {p[1] * n, p[2] * n};
  }

  /// Nodes and barycentric weights of the cell containing p.
  std::vector<std::pair<std::size_t, double>> cell(const Belief& p) const {
    const auto [x, y] = chart(p);
    const auto n = static_cast<std::int64_t>(n_);
    if (states_ == 2) {
      std::int64_t i = std::clamp<std::int64_t>(static_cast<std::int64_t>(std::floor(x)), 0, n - 1);
      const double f = std::clamp(x - static_cast<double>(i), 0.0, 1.0);
      return {{index(static_cast<std::size_t>(i)), 1.0 - f}, {index(static_cast<std::size_t>(i + 1)), f}};
    }
    std::int64_t i = std::clamp<std::int64_t>(static_cast<std::int64_t>(std::floor(x)), 0, n - 1);
    std::int64_t j = std::clamp<std::int64_t>(static_cast<std::int64_t>(std::floor(y)), 0, n - 1);
    while (i + j > n - 1) {
      if (j > 0) --j;
      else --i;
    }
    double fx = std::clamp(x - static_cast<double>(i), 0.0, 1.0);
    double fy = std::clamp(y - static_cast<double>(j), 0.0, 1.0);
    auto at = [&](std::int64_t a, std::int64_t b) { return index(static_cast<std::size_t>(a), static_cast<std::size_t>(b)); };
    if (fx + fy > 1.0 && i + j + 2 <= n) {
      return {{at(i + 1, j + 1), fx + fy - 1.0}, {at(i + 1, j), 1.0 - fy}, {at(i, j + 1), 1.0 - fx}};
    }
    if (fx + fy > 1.0) {
      // Round-off pushed p past the hypotenuse.
      const double s = fx + fy;
      fx /= s;
      fy /= s;
    }
    return {{at(i, j), 1.0 - fx - fy}, {at(i + 1, j), fx}, {at(i, j + 1), fy}};
  }

 private:
  std::size_t states_;
  std::size_t n_;
};

/// One value per grid node.
struct ValueField {
  SimplexGrid grid;
  std::vector<double> values;

  explicit ValueField(SimplexGrid g, double fill = 0.0) : grid(g), values(g.size(), fill) {}
  ValueField(SimplexGrid g, std::vector<double> v) : grid(g), values(std::move(v)) {
    require(values.size() == grid.size(), ErrorCode::invalid_argument, "field size differs from the grid");
  }
};

/// Barycentric interpolation in the grid cell containing p.
inline double interpolate(const ValueField& field, const Belief& p) {
  double v = 0.0;
  for (const auto& [node, w] : field.grid.cell(p)) v += w * field.values[node];
  return v;
}

inline double sup_distance(const ValueField& a, const ValueField& b) {
  require(a.values.size() == b.values.size(), ErrorCode::invalid_argument, "fields live on different grids");
  return sup_distance(std::span<const double>(a.values), std::span<const double>(b.values));
}

}  // namespace persuade
