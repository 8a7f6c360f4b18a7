#pragma once

// Upper concave envelopes of values lifted over integer lattice points: a
// monotone chain on a segment and an incremental upper hull on the lattice
// triangle {(i, j) : i, j >= 0, i + j <= n}.

#include <algorithm>
#include <array>
#include <cstddef>
#include <cstdint>
#include <limits>
#include <vector>

#include "persuade/error.hpp"

namespace persuade {

inline constexpr double kHullEps = 1e-12;

/// Upper envelope of (i, values[i]), i = 0..n, evaluated at every i.
/// `vertices` receives the indices of the envelope breakpoints.
inline std::vector<double> upper_envelope_1d(const std::vector<double>& values,
                                             std::vector<std::size_t>* vertices = nullptr) {
  const std::size_t n = values.size();
  std::vector<std::size_t> chain;
  chain.reserve(n);
  for (std::size_t i = 0; i < n; ++i) {
    while (chain.size() >= 2) {
      const std::size_t a = chain[chain.size() - 2];
      const std::size_t b = chain.back();
      // Drop b when it lies on or below the chord from a to i.
      const double cross = (values[b] - values[a]) * static_cast<double>(i - a) -
                           (values[i] - values[a]) * static_cast<double>(b - a);
      if (cross > kHullEps * static_cast<double>(i - a)) break;
      chain.pop_back();
    }
    chain.push_back(i);
  }
  std::vector<double> out(values);
  for (std::size_t s = 0; s + 1 < chain.size(); ++s) {
    const std::size_t a = chain[s], b = chain[s + 1];
    const double slope = (values[b] - values[a]) / static_cast<double>(b - a);
    for (std::size_t i = a + 1; i < b; ++i)
      out[i] = std::max(values[i], values[a] + slope * static_cast<double>(i - a));
  }
  if (vertices) *vertices = std::move(chain);
  return out;
}

struct LatticePoint {
  std::int64_t x = 0;
  std::int64_t y = 0;
};

inline std::int64_t orient(const LatticePoint& a, const LatticePoint& b, const LatticePoint& c) {
  return (b.x - a.x) * (c.y - a.y) - (b.y - a.y) * (c.x - a.x);
}

/// Upper hull of lifted lattice points over the triangle with corners
/// (0,0), (n,0), (0,n). Every point of the triangle must be supplied.
///
/// Quickhull on the upper surface only: each facet keeps the points whose
/// projection it contains, the highest point above its plane is inserted
/// and the visible region is replaced by a cone. Point membership is
/// decided with exact integer orientation tests.
class UpperHull2 {
 public:
  struct Facet {
    std::array<std::size_t, 3> v{};  // counterclockwise
    std::array<int, 3> nb{-1, -1, -1};  // neighbor across edge (v[k], v[k+1]); -1 on the domain boundary
    double a = 0.0, b = 0.0;  // z = z0 + a (x - x0) + b (y - y0)
    bool alive = true;
  };

  UpperHull2(std::vector<LatticePoint> points, std::vector<double> values, std::size_t corner0,
             std::size_t corner1, std::size_t corner2)
      : pts_(std::move(points)), z_(std::move(values)), owner_(pts_.size(), -1) {
    require(pts_.size() == z_.size(), ErrorCode::invalid_argument, "hull point and value counts differ");
    require(orient(pts_[corner0], pts_[corner1], pts_[corner2]) > 0, ErrorCode::invalid_argument,
            "hull corners must be counterclockwise");
    const int root = add_facet({corner0, corner1, corner2});
    std::vector<std::size_t> rest;
    rest.reserve(pts_.size());
    for (std::size_t i = 0; i < pts_.size(); ++i) {
      if (i == corner0 || i == corner1 || i == corner2) continue;
      rest.push_back(i);
      owner_[i] = root;
    }
    members_[static_cast<std::size_t>(root)] = std::move(rest);
    build();
  }

  const std::vector<Facet>& facets() const noexcept { return facets_; }

  /// Facet whose closed projection contains point i.
  int owner(std::size_t i) const { return owner_[i]; }

  double height(std::size_t point, const Facet& f) const { return z_[point] - plane(f, pts_[point]); }

  double plane(const Facet& f, const LatticePoint& q) const {
    const LatticePoint& o = pts_[f.v[0]];
    return z_[f.v[0]] + f.a * static_cast<double>(q.x - o.x) + f.b * static_cast<double>(q.y - o.y);
  }

  double plane_at(const Facet& f, double x, double y) const {
    const LatticePoint& o = pts_[f.v[0]];
    return z_[f.v[0]] + f.a * (x - static_cast<double>(o.x)) + f.b * (y - static_cast<double>(o.y));
  }

  /// Envelope value at every input point.
  std::vector<double> envelope() const {
    std::vector<double> out(z_);
    for (std::size_t i = 0; i < pts_.size(); ++i) {
      const int f = owner_[i];
      if (f >= 0) out[i] = std::max(out[i], plane(facets_[static_cast<std::size_t>(f)], pts_[i]));
    }
    return out;
  }

  const std::vector<LatticePoint>& points() const noexcept { return pts_; }
  const std::vector<double>& values() const noexcept { return z_; }

 private:
  int add_facet(std::array<std::size_t, 3> v) {
    Facet f;
    f.v = v;
    const LatticePoint& p0 = pts_[v[0]];
    const LatticePoint& p1 = pts_[v[1]];
    const LatticePoint& p2 = pts_[v[2]];
    const double x1 = static_cast<double>(p1.x - p0.x), y1 = static_cast<double>(p1.y - p0.y);
    const double x2 = static_cast<double>(p2.x - p0.x), y2 = static_cast<double>(p2.y - p0.y);
    const double z1 = z_[v[1]] - z_[v[0]], z2 = z_[v[2]] - z_[v[0]];
    const double det = static_cast<double>(orient(p0, p1, p2));
    f.a = (z1 * y2 - z2 * y1) / det;
    f.b = (x1 * z2 - x2 * z1) / det;
    facets_.push_back(f);
    members_.emplace_back();
    return static_cast<int>(facets_.size() - 1);
  }

  bool inside(const Facet& f, const LatticePoint& q) const {
    return orient(pts_[f.v[0]], pts_[f.v[1]], q) >= 0 && orient(pts_[f.v[1]], pts_[f.v[2]], q) >= 0 &&
           orient(pts_[f.v[2]], pts_[f.v[0]], q) >= 0;
  }

  std::int64_t area2(const Facet& f) const { return orient(pts_[f.v[0]], pts_[f.v[1]], pts_[f.v[2]]); }

  void build() {
    std::vector<int> work{0};
    while (!work.empty()) {
      const int fi = work.back();
      work.pop_back();
      if (!facets_[static_cast<std::size_t>(fi)].alive) continue;
      // Highest point above this facet; ties go to the lowest index.
      std::size_t apex = 0;
      double best = kHullEps;
      bool found = false;
      for (std::size_t q : members_[static_cast<std::size_t>(fi)]) {
        const double h = height(q, facets_[static_cast<std::size_t>(fi)]);
        if (h > best) {
          best = h;
          apex = q;
          found = true;
        }
      }
      if (!found) continue;
      insert(fi, apex, work);
    }
  }

  void insert(int start, std::size_t apex, std::vector<int>& work) {
    const LatticePoint& p = pts_[apex];
    std::vector<int> region{start};
    std::vector<char> in_region(facets_.size(), 0);
    in_region[static_cast<std::size_t>(start)] = 1;
    for (std::size_t k = 0; k < region.size(); ++k) {
      const Facet& f = facets_[static_cast<std::size_t>(region[k])];
      for (int g : f.nb) {
        if (g < 0 || in_region[static_cast<std::size_t>(g)]) continue;
        if (z_[apex] - plane(facets_[static_cast<std::size_t>(g)], p) > kHullEps) {
          in_region[static_cast<std::size_t>(g)] = 1;
          region.push_back(g);
        }
      }
    }

    struct Edge {
      std::size_t a, b;
      int outside;
    };
    std::vector<Edge> horizon;
    for (;;) {
      horizon.clear();
      int grow = -1;
      for (int fi : region) {
        const Facet& f = facets_[static_cast<std::size_t>(fi)];
        for (int k = 0; k < 3 && grow < 0; ++k) {
          const int g = f.nb[static_cast<std::size_t>(k)];
          if (g >= 0 && in_region[static_cast<std::size_t>(g)]) continue;
          const std::size_t a = f.v[static_cast<std::size_t>(k)], b = f.v[static_cast<std::size_t>((k + 1) % 3)];
          const std::int64_t o = orient(pts_[a], pts_[b], p);
          if (g >= 0 && o <= 0) grow = g;
          else if (g < 0 && o < 0) fail(ErrorCode::divergence, "hull apex outside the domain");
          else if (o > 0) horizon.push_back({a, b, g});
        }
        if (grow >= 0) break;
      }
      if (grow < 0) break;
      in_region[static_cast<std::size_t>(grow)] = 1;
      region.push_back(grow);
    }

    std::int64_t removed_area = 0;
    for (int fi : region) removed_area += area2(facets_[static_cast<std::size_t>(fi)]);
    std::int64_t cone_area = 0;
    for (const Edge& e : horizon) cone_area += orient(pts_[e.a], pts_[e.b], p);
    require(cone_area == removed_area, ErrorCode::divergence, "hull visible region is not star-shaped");

    std::vector<std::size_t> orphans;
    for (int fi : region) {
      facets_[static_cast<std::size_t>(fi)].alive = false;
      for (std::size_t q : members_[static_cast<std::size_t>(fi)])
        if (q != apex) orphans.push_back(q);
      members_[static_cast<std::size_t>(fi)].clear();
      members_[static_cast<std::size_t>(fi)].shrink_to_fit();
    }
    owner_[apex] = -1;
    // Vertices strictly inside the removed region drop below the new surface.
    std::vector<char> on_horizon(pts_.size(), 0);
    for (const Edge& e : horizon) on_horizon[e.a] = on_horizon[e.b] = 1;
    on_horizon[apex] = 1;
    for (int fi : region)
      for (std::size_t v : facets_[static_cast<std::size_t>(fi)].v)
        if (!on_horizon[v]) {
          on_horizon[v] = 1;
          orphans.push_back(v);
        }

    std::vector<int> cone;
    cone.reserve(horizon.size());
    for (const Edge& e : horizon) {
      const int nf = add_facet({e.a, e.b, apex});
      cone.push_back(nf);
      Facet& f = facets_[static_cast<std::size_t>(nf)];
      f.nb[0] = e.outside;
      if (e.outside >= 0) {
        Facet& o = facets_[static_cast<std::size_t>(e.outside)];
        for (std::size_t k = 0; k < 3; ++k)
          if (o.v[k] == e.b && o.v[(k + 1) % 3] == e.a) o.nb[k] = nf;
      }
    }
    for (std::size_t i = 0; i < cone.size(); ++i) {
      Facet& f = facets_[static_cast<std::size_t>(cone[i])];
      for (std::size_t j = 0; j < cone.size(); ++j) {
        if (i == j) continue;
        const Facet& g = facets_[static_cast<std::size_t>(cone[j])];
        if (g.v[0] == f.v[1]) f.nb[1] = cone[j];  // edge (b, apex)
        if (g.v[1] == f.v[0]) f.nb[2] = cone[j];  // edge (apex, a)
      }
    }

    for (std::size_t q : orphans) {
      int home = -1;
      for (int nf : cone)
        if (inside(facets_[static_cast<std::size_t>(nf)], pts_[q])) {
          home = nf;
          break;
        }
      require(home >= 0, ErrorCode::divergence, "hull point lost during redistribution");
      owner_[q] = home;
      members_[static_cast<std::size_t>(home)].push_back(q);
    }
    for (int nf : cone) work.push_back(nf);
  }

  std::vector<LatticePoint> pts_;
  std::vector<double> z_;
  std::vector<int> owner_;
  std::vector<Facet> facets_;
  std::vector<std::vector<std::size_t>> members_;
};

}  // namespace persuade
