#pragma once

// Value iteration on a simplex grid: each Bellman step concavifies the
// operand (1 - delta) 1{q in I} + delta V(drift(q)), and the supporting facet
// of the concavified operand yields a splitting with at most two atoms.

#include <algorithm>
#include <cmath>
#include <cstddef>
#include <memory>
#include <optional>
#include <utility>
#include <vector>

#include "persuade/error.hpp"
#include "persuade/evaluate.hpp"
#include "persuade/grid.hpp"
#include "persuade/hull.hpp"
#include "persuade/model.hpp"
#include "persuade/parallel.hpp"
#include "persuade/splitting.hpp"

namespace persuade {

/// Least concave majorant of a grid field, kept with its facet structure so
/// it can be evaluated and its supporting facet located off the nodes.
class Envelope {
 public:
  struct Support {
    std::vector<std::pair<std::size_t, double>> nodes;  // (grid node, barycentric weight)
    double value = 0.0;
  };

  explicit Envelope(const ValueField& field) : grid_(field.grid), input_(field.values) {
    if (grid_.states() == 2) {
      values_ = upper_envelope_1d(input_, &chain_);
      return;
    }
    const std::size_t n = grid_.resolution();
    std::vector<LatticePoint> pts;
    pts.reserve(grid_.size());
    for (std::size_t i = 0; i <= n; ++i)
      for (std::size_t j = 0; i + j <= n; ++j)
        pts.push_back({static_cast<std::int64_t>(i), static_cast<std::int64_t>(j)});
    hull_.emplace(std::move(pts), input_, grid_.index(0, 0), grid_.index(n, 0), grid_.index(0, n));
    values_ = hull_->envelope();
  }

  const SimplexGrid& grid() const noexcept { return grid_; }
  const std::vector<double>& values() const noexcept { return values_; }
  ValueField field() const { return {grid_, values_}; }

  /// Facet of the envelope above p, as grid nodes with barycentric weights.
  Support support(const Belief& p) const {
    const auto [x, y] = grid_.chart(p);
    Support s;
    if (grid_.states() == 2) {
      auto it = std::upper_bound(chain_.begin(), chain_.end(), x,
                                 [](double v, std::size_t node) { return v < static_cast<double>(node); });
      if (it == chain_.end()) --it;
      if (it == chain_.begin()) ++it;
      const std::size_t a = *(it - 1), b = *it;
      const double t = std::clamp((x - static_cast<double>(a)) / static_cast<double>(b - a), 0.0, 1.0);
      s.nodes = {{a, 1.0 - t}, {b, t}};
    } else {
      const auto& facets = hull_->facets();
      const auto& pts = hull_->points();
      auto bary = [&](const UpperHull2::Facet& f) {
        const LatticePoint &p0 = pts[f.v[0]], &p1 = pts[f.v[1]], &p2 = pts[f.v[2]];
        const double det = static_cast<double>(orient(p0, p1, p2));
        const double x0 = static_cast<double>(p0.x), y0 = static_cast<double>(p0.y);
        const double b1 = ((x - x0) * static_cast<double>(p2.y - p0.y) - (y - y0) * static_cast<double>(p2.x - p0.x)) / det;
        const double b2 = ((y - y0) * static_cast<double>(p1.x - p0.x) - (x - x0) * static_cast<double>(p1.y - p0.y)) / det;
        return std::array<double, 3>{1.0 - b1 - b2, b1, b2};
      };
      // Try facets owning the nodes of p's grid cell before scanning them all.
      int best = -1;
      double best_margin = -std::numeric_limits<double>::infinity();
      auto consider = [&](int fi) {
        if (fi < 0 || !facets[static_cast<std::size_t>(fi)].alive) return;
        const auto b = bary(facets[static_cast<std::size_t>(fi)]);
        const double margin = std::min({b[0], b[1], b[2]});
        if (margin > best_margin) {
          best_margin = margin;
          best = fi;
        }
      };
      for (const auto& [node, w] : grid_.cell(p)) consider(hull_->owner(node));
      if (best_margin < -1e-12)
        for (std::size_t fi = 0; fi < facets.size(); ++fi) consider(static_cast<int>(fi));
      const auto& f = facets[static_cast<std::size_t>(best)];
      auto b = bary(f);
      for (double& w : b) w = std::max(w, 0.0);
      const double total = b[0] + b[1] + b[2];
      for (std::size_t k = 0; k < 3; ++k) s.nodes.emplace_back(f.v[k], b[k] / total);
    }
    for (const auto& [node, w] : s.nodes) s.value += w * values_[node];
    return s;
  }

  double value_at(const Belief& p) const { return support(p).value; }

 private:
  SimplexGrid grid_;
  std::vector<double> input_;
  std::vector<double> values_;
  std::vector<std::size_t> chain_;
  std::optional<UpperHull2> hull_;
};

inline ValueField concavify(const ValueField& field) { return Envelope(field).field(); }

/// Precomputed Bellman operand on a grid: the stage indicator at each node
/// and the interpolation stencil of its drift image.
class BellmanOperator {
 public:
  BellmanOperator(SimplexGrid grid, double delta, const MarkovModel& chain, const PayoffStructure& payoffs)
      : grid_(grid), delta_(delta), chain_(chain), payoffs_(payoffs) {
    require(delta >= 0.0 && delta < 1.0, ErrorCode::invalid_argument, "discount must lie in [0,1)");
    require(grid.states() == chain.size() && chain.size() == payoffs.size(), ErrorCode::invalid_argument,
            "grid, chain and payoff dimensions differ");
    const std::size_t n = grid_.size();
    invest_.resize(n);
    stencil_.resize(n);
    parallel_for(n, [&](std::size_t k) {
      const Belief q = grid_.node(k);
      invest_[k] = invests(q, payoffs_) ? 1 : 0;
      stencil_[k] = grid_.cell(drift(q, chain_));
    });
  }

  const SimplexGrid& grid() const noexcept { return grid_; }
  double delta() const noexcept { return delta_; }
  const MarkovModel& chain() const noexcept { return chain_; }
  const PayoffStructure& payoffs() const noexcept { return payoffs_; }

  /// (1 - delta) 1{node in I} + delta V(drift(node)) at every node.
  ValueField operand(const ValueField& v) const {
    require(v.values.size() == grid_.size(), ErrorCode::invalid_argument, "field lives on another grid");
    ValueField w(grid_);
    for (std::size_t k = 0; k < grid_.size(); ++k) {
      double cont = 0.0;
      for (const auto& [node, wt] : stencil_[k]) cont += wt * v.values[node];
      w.values[k] = (1.0 - delta_) * invest_[k] + delta_ * cont;
    }
    return w;
  }

  /// Operand at an arbitrary belief.
  double operand_at(const ValueField& v, const Belief& q) const {
    return (1.0 - delta_) * (invests(q, payoffs_) ? 1.0 : 0.0) + delta_ * interpolate(v, drift(q, chain_));
  }

  ValueField apply(const ValueField& v) const { return concavify(operand(v)); }

 private:
  SimplexGrid grid_;
  double delta_;
  MarkovModel chain_;
  PayoffStructure payoffs_;
  std::vector<double> invest_;
  std::vector<std::vector<std::pair<std::size_t, double>>> stencil_;
};

inline ValueField bellman_step(const ValueField& field, double delta, const MarkovModel& chain,
                               const PayoffStructure& payoffs) {
  return BellmanOperator(field.grid, delta, chain, payoffs).apply(field);
}

struct SolveResult {
  ValueField field;
  std::size_t iterations = 0;
  double last_change = 0.0;
};

/// Iterates the Bellman step from the zero field until successive fields
/// differ by at most eps (1 - delta) / delta.
inline SolveResult solve(double delta, const MarkovModel& chain, const PayoffStructure& payoffs,
                         const SimplexGrid& grid, double eps, std::size_t max_iterations = 1'000'000) {
  require(eps > 0.0, ErrorCode::invalid_argument, "solve tolerance must be positive");
  const BellmanOperator op(grid, delta, chain, payoffs);
  SolveResult res{ValueField(grid)};
  const double stop = delta > 0.0 ? eps * (1.0 - delta) / delta : 0.0;
  for (;;) {
    ValueField next = op.apply(res.field);
    res.last_change = sup_distance(next, res.field);
    res.field = std::move(next);
    ++res.iterations;
    if (delta == 0.0 || res.last_change <= stop) break;
    if (res.iterations >= max_iterations) fail(ErrorCode::divergence, "value iteration did not converge");
  }
  return res;
}

/// Optimal splitting at p read off the concavified operand: the vertices of
/// the supporting facet are merged into their investment and
/// noninvestment parts.
class GridPolicy {
 public:
  GridPolicy(const ValueField& value, double delta, const MarkovModel& chain, const PayoffStructure& payoffs)
      : value_(value), op_(value.grid, delta, chain, payoffs), envelope_(op_.operand(value)) {}

  Splitting operator()(const Belief& p) const {
    const PayoffStructure& r = op_.payoffs();
    if (invests(p, r)) return no_disclosure(p);
    const Envelope::Support s = envelope_.support(p);
    Vector sum_i(p.size(), 0.0), sum_j(p.size(), 0.0);
    double w_i = 0.0, w_j = 0.0;
    for (const auto& [node, w] : s.nodes) {
      if (w <= 0.0) continue;
      const Belief q = op_.grid().node(node);
      const bool in = invests(q, r);
      Vector& acc = in ? sum_i : sum_j;
      for (std::size_t k = 0; k < q.size(); ++k) acc[k] += w * q[k];
      (in ? w_i : w_j) += w;
    }
    std::vector<Atom> atoms;
    if (w_i > 0.0) atoms.push_back({w_i, Belief::normalized(std::move(sum_i))});
    if (w_j > 0.0) atoms.push_back({w_j, Belief::normalized(std::move(sum_j))});
    return make_splitting(p, std::move(atoms));
  }

  /// Expected operand of a splitting.
  double value_of(const Splitting& mu) const {
    double v = 0.0;
    for (const Atom& a : mu.atoms()) v += a.weight * op_.operand_at(value_, a.posterior);
    return v;
  }

  const Envelope& operand_envelope() const noexcept { return envelope_; }
  const BellmanOperator& bellman() const noexcept { return op_; }

 private:
  ValueField value_;
  BellmanOperator op_;
  Envelope envelope_;
};

inline Splitting extract_splitting(const Belief& p, const ValueField& field, double delta, const MarkovModel& chain,
                                   const PayoffStructure& payoffs) {
  return GridPolicy(field, delta, chain, payoffs)(p);
}

inline Policy grid_policy(const ValueField& field, double delta, const MarkovModel& chain,
                          const PayoffStructure& payoffs) {
  auto pol = std::make_shared<const GridPolicy>(field, delta, chain, payoffs);
  return [pol](const Belief& p) { return (*pol)(p); };
}

}  // namespace persuade
