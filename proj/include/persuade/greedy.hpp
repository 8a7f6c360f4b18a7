#pragma once

// Closed-form greedy splitting, the cells on which it is affine, and the
// polytope around the invariant measure where greedy play is optimal.

#include <algorithm>
#include <cmath>
#include <cstddef>
#include <optional>
#include <vector>

#include "persuade/error.hpp"
#include "persuade/model.hpp"
#include "persuade/splitting.hpp"

namespace persuade {

inline constexpr double kCellTol = 1e-10;

/// Cell index reported for beliefs in the investment region. Cells of the
/// noninvestment region are numbered 1..|negative states|.
inline constexpr std::size_t kInvestCell = 0;

/// Payoff of the positive states plus the first k negative states in
/// decreasing-payoff order. ell(0, p) sums the positive states only.
inline double ell(std::size_t k, const Belief& p, const PayoffStructure& r) {
  require(p.size() == r.size(), ErrorCode::invalid_argument, "belief and payoff dimensions differ");
  const auto& order = r.negative_order();
  require(k <= order.size(), ErrorCode::invalid_argument, "ell index out of range");
  double s = 0.0;
  for (std::size_t w : r.positive_states()) s += p[w] * r[w];
  for (std::size_t i = 0; i < k; ++i) s += p[order[i]] * r[order[i]];
  return s;
}

/// All of ell(0..K, p) in one pass.
inline Vector ell_values(const Belief& p, const PayoffStructure& r) {
  require(p.size() == r.size(), ErrorCode::invalid_argument, "belief and payoff dimensions differ");
  const auto& order = r.negative_order();
  Vector out(order.size() + 1);
  double s = 0.0;
  for (std::size_t w : r.positive_states()) s += p[w] * r[w];
  out[0] = s;
  for (std::size_t i = 0; i < order.size(); ++i) {
    s += p[order[i]] * r[order[i]];
    out[i + 1] = s;
  }
  return out;
}

/// kInvestCell when the belief invests, otherwise the first k with
/// ell(k, p) <= 0 (within kCellTol).
inline std::size_t cell_index(const Belief& p, const PayoffStructure& r) {
  if (invests(p, r)) return kInvestCell;
  const Vector l = ell_values(p, r);
  for (std::size_t k = 1; k < l.size(); ++k)
    if (l[k] <= kCellTol) return k;
  return l.size() - 1;
}

/// p = a_I q_I + a_J q_J with q_I in the investment region and a_I maximal.
struct GreedySplit {
  double a_I = 1.0;
  std::optional<Belief> q_I;  // empty when a_I = 0
  double a_J = 0.0;
  std::optional<Belief> q_J;  // empty when a_J = 0
  std::size_t k_star = kInvestCell;
  Vector pi_star;

  Splitting as_splitting(const Belief& p) const {
    std::vector<Atom> atoms;
    if (q_I && a_I > 0.0) atoms.push_back({a_I, *q_I});
    if (q_J && a_J > 0.0) atoms.push_back({a_J, *q_J});
    return make_splitting(p, std::move(atoms));
  }
};

inline GreedySplit greedy_split(const Belief& p, const PayoffStructure& r) {
  require(p.size() == r.size(), ErrorCode::invalid_argument, "belief and payoff dimensions differ");
  GreedySplit g;
  if (invests(p, r)) {
    g.q_I = p;
    g.pi_star = p.weights();
    return g;
  }
  const auto& order = r.negative_order();
  const Vector l = ell_values(p, r);
  std::size_t k = 1;
  while (k < order.size() && l[k] > 0.0) ++k;

  Vector pi(p.size(), 0.0);
  for (std::size_t w : r.positive_states()) pi[w] = p[w];
  for (std::size_t i = 0; i + 1 < k; ++i) pi[order[i]] = p[order[i]];
  const std::size_t wk = order[k - 1];
  pi[wk] = std::clamp(-l[k - 1] / r[wk], 0.0, p[wk]);

  double mass = 0.0;
  for (double x : pi) mass += x;
  g.k_star = k;
  g.a_I = std::clamp(mass, 0.0, 1.0);
  g.a_J = 1.0 - g.a_I;
  if (g.a_I > 0.0) g.q_I = Belief::normalized(pi);
  Vector rest(p.size());
  double rest_mass = 0.0;
  for (std::size_t i = 0; i < rest.size(); ++i) {
    rest[i] = std::max(0.0, p[i] - pi[i]);
    rest_mass += rest[i];
  }
  if (rest_mass <= 0.0) {
    g.a_I = 1.0;
    g.a_J = 0.0;
  }
  if (g.a_J > 0.0) g.q_J = g.a_I > 0.0 ? Belief::normalized(std::move(rest)) : p;
  g.pi_star = std::move(pi);
  return g;
}

/// Optimal value of max pi(Omega) s.t. 0 <= pi <= p, <pi, r> >= 0, by
/// enumerating the vertices of the feasible polytope. Exponential in the
/// number of states; meant as an independent check on small instances.
inline double lp_value_oracle(const Belief& p, const PayoffStructure& r) {
  require(p.size() == r.size(), ErrorCode::invalid_argument, "belief and payoff dimensions differ");
  const std::size_t n = p.size();
  require(n <= 20, ErrorCode::invalid_argument, "vertex enumeration limited to 20 states");
  const double feas_tol = 1e-13;
  double best = 0.0;
  const std::size_t corners = std::size_t{1} << n;
  for (std::size_t mask = 0; mask < corners; ++mask) {
    double mass = 0.0;
    double pay = 0.0;
    for (std::size_t i = 0; i < n; ++i)
      if (mask >> i & 1U) {
        mass += p[i];
        pay += p[i] * r[i];
      }
    if (pay >= -feas_tol) best = std::max(best, mass);
    // Edges of the box along coordinate j, cut by the hyperplane <pi, r> = 0.
    for (std::size_t j = 0; j < n; ++j) {
      if (mask >> j & 1U || r[j] == 0.0) continue;
      const double x = -pay / r[j];
      if (x >= 0.0 && x <= p[j]) best = std::max(best, mass + x);
    }
  }
  return best;
}

/// Highest one-round probability of investment.
inline double max_stage_payoff(const Belief& p, const PayoffStructure& r) {
  if (invests(p, r)) return 1.0;
  return greedy_split(p, r).a_I;
}

/// P = {p : <p,r> <= 0, ell(lower, p) >= 0 >= ell(upper, p)}, with the
/// lower constraint vacuous when lower = 0.
struct Polytope {
  std::size_t lower = 0;
  std::size_t upper = 1;

  bool contains(const Belief& p, const PayoffStructure& r, double tol = kCellTol) const {
    if (expected_payoff(p, r) > tol) return false;
    const Vector l = ell_values(p, r);
    if (lower > 0 && l[lower] < -tol) return false;
    return l[upper] <= tol;
  }
};

inline Polytope p_polytope(const Belief& m, const PayoffStructure& r) {
  require(m.size() == r.size(), ErrorCode::invalid_argument, "belief and payoff dimensions differ");
  require(expected_payoff(m, r) < -kCellTol, ErrorCode::not_applicable,
          "invariant measure invests; the investment region is the absorbing set");
  const Vector l = ell_values(m, r);
  const std::size_t last = l.size() - 1;
  auto positive = [&](std::size_t i) { return i == 0 || l[i] > kCellTol; };
  std::size_t k = 1;
  while (k < last && positive(k)) ++k;
  if (positive(k - 1) && l[k] < -kCellTol) return {k - 1, k};
  // ell(k..l, m) vanish: take the union of the adjacent cells.
  std::size_t hi = k;
  while (hi < last && std::abs(l[hi + 1]) <= kCellTol) ++hi;
  return {k - 1, std::min(hi + 1, last)};
}

}  // namespace persuade
