#pragma once

// States, payoffs, beliefs and Markov dynamics.

#include <algorithm>
#include <cmath>
#include <cstddef>
#include <numeric>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include "persuade/error.hpp"

namespace persuade {

using Vector = std::vector<double>;
using Matrix = std::vector<Vector>;

inline constexpr double kFrontierTol = 1e-12;
inline constexpr double kNegativeClamp = 1e-12;
inline constexpr double kSumTol = 1e-9;

inline double dot(std::span<const double> a, std::span<const double> b) {
  require(a.size() == b.size(), ErrorCode::invalid_argument, "dimension mismatch in dot product");
  double s = 0.0;
  for (std::size_t i = 0; i < a.size(); ++i) s += a[i] * b[i];
  return s;
}

inline double l1_distance(std::span<const double> a, std::span<const double> b) {
  double s = 0.0;
  for (std::size_t i = 0; i < a.size(); ++i) s += std::abs(a[i] - b[i]);
  return s;
}

inline double sup_distance(std::span<const double> a, std::span<const double> b) {
  double s = 0.0;
  for (std::size_t i = 0; i < a.size(); ++i) s = std::max(s, std::abs(a[i] - b[i]));
  return s;
}

/// A probability vector over states.
///
/// Entries below -1e-12 are rejected, smaller negatives are clamped to zero,
/// and the result is renormalized. The raw entries must already sum to one
/// within 1e-9; use `Belief::normalized` to build a belief from an arbitrary
/// nonnegative measure.
class Belief {
 public:
  Belief() = default;

  explicit Belief(Vector weights) : w_(std::move(weights)) {
    require(!w_.empty(), ErrorCode::invalid_argument, "belief over an empty state set");
    double total = 0.0;
    for (double& x : w_) {
      require(std::isfinite(x), ErrorCode::invalid_argument, "belief entry is not finite");
      if (x < -kNegativeClamp) fail(ErrorCode::invalid_argument, "belief entry " + std::to_string(x) + " is negative");
      if (x < 0.0) x = 0.0;
      total += x;
    }
    if (!(std::abs(total - 1.0) <= kSumTol))
      fail(ErrorCode::invalid_argument, "belief entries sum to " + std::to_string(total));
    for (double& x : w_) x /= total;
  }

  Belief(std::initializer_list<double> weights) : Belief(Vector(weights)) {}

  static Belief normalized(Vector measure) {
    double total = 0.0;
    for (double& x : measure) {
      require(std::isfinite(x) && x >= -kNegativeClamp, ErrorCode::invalid_argument,
              "measure entry is negative or not finite");
      if (x < 0.0) x = 0.0;
      total += x;
    }
    require(total > 0.0, ErrorCode::invalid_argument, "cannot normalize a zero measure");
    for (double& x : measure) x /= total;
    return Belief(std::move(measure));
  }

  static Belief vertex(std::size_t n, std::size_t state) {
    require(state < n, ErrorCode::invalid_argument, "vertex index out of range");
    Vector w(n, 0.0);
    w[state] = 1.0;
    return Belief(std::move(w));
  }

  static Belief uniform(std::size_t n) { return Belief(Vector(n, 1.0 / static_cast<double>(n))); }

  /// a*p + (1-a)*q.
  static Belief mix(double a, const Belief& p, const Belief& q) {
    require(p.size() == q.size(), ErrorCode::invalid_argument, "dimension mismatch in mix");
    Vector w(p.size());
    for (std::size_t i = 0; i < w.size(); ++i) w[i] = a * p[i] + (1.0 - a) * q[i];
    return normalized(std::move(w));
  }

  std::size_t size() const noexcept { return w_.size(); }
  double operator[](std::size_t i) const { return w_[i]; }
  const Vector& weights() const noexcept { return w_; }
  std::span<const double> span() const noexcept { return w_; }
  auto begin() const noexcept { return w_.begin(); }
  auto end() const noexcept { return w_.end(); }

  friend bool operator==(const Belief&, const Belief&) = default;

 private:
  Vector w_;
};

enum class Region { Invest, NoInvest, Frontier };

inline std::string_view to_string(Region r) {
  switch (r) {
    case Region::Invest: return "invest";
    case Region::NoInvest: return "no-invest";
    case Region::Frontier: return "frontier";
  }
  return "?";
}

/// Net payoff per state and the partition it induces.
class PayoffStructure {
 public:
  PayoffStructure() = default;

  explicit PayoffStructure(Vector r) : r_(std::move(r)) {
    require(!r_.empty(), ErrorCode::invalid_argument, "payoff vector is empty");
    for (std::size_t i = 0; i < r_.size(); ++i) {
      require(std::isfinite(r_[i]), ErrorCode::invalid_argument, "payoff is not finite");
      (r_[i] >= 0.0 ? positive_ : negative_).push_back(i);
    }
    // Decreasing payoff; ties keep ascending state index.
    std::stable_sort(negative_.begin(), negative_.end(),
                     [this](std::size_t a, std::size_t b) { return r_[a] > r_[b]; });
  }

  PayoffStructure(std::initializer_list<double> r) : PayoffStructure(Vector(r)) {}

  std::size_t size() const noexcept { return r_.size(); }
  double operator[](std::size_t i) const { return r_[i]; }
  const Vector& values() const noexcept { return r_; }

  const std::vector<std::size_t>& positive_states() const noexcept { return positive_; }
  /// Negative states ordered by decreasing payoff: r(w_1) >= ... >= r(w_K) < 0.
  const std::vector<std::size_t>& negative_order() const noexcept { return negative_; }

  /// Every belief invests; every policy is optimal.
  bool all_invest() const noexcept { return negative_.empty(); }
  /// No belief can be split into the investment region.
  bool none_invest() const noexcept { return positive_.empty(); }
  bool degenerate() const noexcept { return all_invest() || none_invest(); }

  bool distinct_negative_payoffs() const {
    for (std::size_t i = 1; i < negative_.size(); ++i)
      if (r_[negative_[i - 1]] == r_[negative_[i]]) return false;
    return true;
  }

 private:
  Vector r_;
  std::vector<std::size_t> positive_;
  std::vector<std::size_t> negative_;
};

inline double expected_payoff(const Belief& p, const PayoffStructure& r) {
  require(p.size() == r.size(), ErrorCode::invalid_argument, "belief and payoff dimensions differ");
  return dot(p.span(), r.values());
}

inline Region classify(const Belief& p, const PayoffStructure& r) {
  const double v = expected_payoff(p, r);
  if (std::abs(v) <= kFrontierTol) return Region::Frontier;
  return v > 0.0 ? Region::Invest : Region::NoInvest;
}

/// The investor invests on the frontier too.
inline bool invests(const Belief& p, const PayoffStructure& r) {
  return classify(p, r) != Region::NoInvest;
}

struct Renewal {
  Belief m;
  double lambda = 0.0;
};

namespace detail {

/// Solves A x = b (A has rows >= cols) by Gaussian elimination with partial
/// pivoting. Returns nullopt when A does not have full column rank.
inline std::optional<Vector> solve_full_rank(Matrix a, Vector b, double tol = 1e-11) {
  const std::size_t rows = a.size();
  const std::size_t cols = a.empty() ? 0 : a[0].size();
  std::size_t row = 0;
  std::vector<std::size_t> pivot_row(cols);
  for (std::size_t col = 0; col < cols; ++col) {
    if (row >= rows) return std::nullopt;
    std::size_t best = row;
    for (std::size_t i = row; i < rows; ++i)
      if (std::abs(a[i][col]) > std::abs(a[best][col])) best = i;
    if (std::abs(a[best][col]) <= tol) return std::nullopt;
    std::swap(a[best], a[row]);
    std::swap(b[best], b[row]);
    for (std::size_t i = 0; i < rows; ++i) {
      if (i == row) continue;
      const double f = a[i][col] / a[row][col];
      if (f == 0.0) continue;
      for (std::size_t j = col; j < cols; ++j) a[i][j] -= f * a[row][j];
      b[i] -= f * b[row];
    }
    pivot_row[col] = row++;
  }
  Vector x(cols);
  for (std::size_t col = 0; col < cols; ++col) x[col] = b[pivot_row[col]] / a[pivot_row[col]][col];
  return x;
}

inline void validate_stochastic(const Matrix& m) {
  const std::size_t n = m.size();
  require(n > 0, ErrorCode::invalid_argument, "transition matrix is empty");
  for (const Vector& row : m) {
    require(row.size() == n, ErrorCode::invalid_argument, "transition matrix is not square");
    double s = 0.0;
    for (double x : row) {
      require(std::isfinite(x) && x >= 0.0, ErrorCode::invalid_argument,
              "transition entries must be finite and nonnegative");
      s += x;
    }
    if (!(std::abs(s - 1.0) <= 1e-12))
      fail(ErrorCode::invalid_argument, "transition row sums to " + std::to_string(s));
  }
}

inline Vector row_times(std::span<const double> p, const Matrix& m) {
  Vector out(m.size(), 0.0);
  for (std::size_t i = 0; i < m.size(); ++i)
    for (std::size_t j = 0; j < m.size(); ++j) out[j] += p[i] * m[i][j];
  return out;
}

}  // namespace detail

/// Stationary distribution of a row-stochastic matrix.
///
/// Throws ambiguous-invariant when the stationary distribution is not unique.
inline Belief invariant_measure(const Matrix& transition) {
  detail::validate_stochastic(transition);
  const std::size_t n = transition.size();
  // Rows: (M^T - I) m = 0, plus sum(m) = 1.
  Matrix a(n + 1, Vector(n, 0.0));
  Vector b(n + 1, 0.0);
  for (std::size_t i = 0; i < n; ++i)
    for (std::size_t j = 0; j < n; ++j) a[i][j] = transition[j][i] - (i == j ? 1.0 : 0.0);
  std::fill(a[n].begin(), a[n].end(), 1.0);
  b[n] = 1.0;
  auto m = detail::solve_full_rank(std::move(a), std::move(b));
  if (!m) fail(ErrorCode::ambiguous_invariant, "stationary distribution is not unique");
  return Belief::normalized(std::move(*m));
}

/// Transition matrix with its invariant measure and, for renewal chains,
/// the homothety parameters (m, lambda).
class MarkovModel {
 public:
  MarkovModel() = default;

  static MarkovModel from_matrix(Matrix transition) {
    detail::validate_stochastic(transition);
    Belief m = invariant_measure(transition);
    return MarkovModel(std::move(transition), std::move(m), std::nullopt);
  }

  /// Accepts reducible chains when the caller supplies the invariant measure.
  static MarkovModel from_matrix(Matrix transition, Belief invariant) {
    detail::validate_stochastic(transition);
    require(invariant.size() == transition.size(), ErrorCode::invalid_argument,
            "invariant measure has the wrong dimension");
    const Vector image = detail::row_times(invariant.span(), transition);
    require(sup_distance(image, invariant.weights()) <= 1e-10, ErrorCode::invalid_argument,
            "supplied measure is not invariant");
    return MarkovModel(std::move(transition), std::move(invariant), std::nullopt);
  }

  static MarkovModel renewal(Belief m, double lambda) {
    require(lambda >= 0.0 && lambda < 1.0, ErrorCode::invalid_argument,
            "renewal ratio must lie in [0,1)");
    const std::size_t n = m.size();
    Matrix t(n, Vector(n));
    for (std::size_t w = 0; w < n; ++w)
      for (std::size_t v = 0; v < n; ++v)
        t[w][v] = (1.0 - lambda) * m[v] + (w == v ? lambda : 0.0);
    Renewal rn{m, lambda};
    return MarkovModel(std::move(t), std::move(m), std::move(rn));
  }

  std::size_t size() const noexcept { return transition_.size(); }
  const Matrix& transition() const noexcept { return transition_; }
  const Belief& invariant() const noexcept { return invariant_; }
  const std::optional<Renewal>& renewal() const noexcept { return renewal_; }

  bool is_irreducible() const {
    const std::size_t n = size();
    for (std::size_t s = 0; s < n; ++s) {
      std::vector<bool> seen(n, false);
      std::vector<std::size_t> stack{s};
      seen[s] = true;
      while (!stack.empty()) {
        const std::size_t u = stack.back();
        stack.pop_back();
        for (std::size_t v = 0; v < n; ++v)
          if (transition_[u][v] > 0.0 && !seen[v]) {
            seen[v] = true;
            stack.push_back(v);
          }
      }
      if (std::find(seen.begin(), seen.end(), false) != seen.end()) return false;
    }
    return true;
  }

 private:
  MarkovModel(Matrix t, Belief m, std::optional<Renewal> rn)
      : transition_(std::move(t)), invariant_(std::move(m)), renewal_(std::move(rn)) {}

  Matrix transition_;
  Belief invariant_;
  std::optional<Renewal> renewal_;
};

inline MarkovModel renewal_chain(const Belief& m, double lambda) { return MarkovModel::renewal(m, lambda); }

/// One round of belief drift without information: p -> pM.
inline Belief drift(const Belief& p, const MarkovModel& chain) {
  require(p.size() == chain.size(), ErrorCode::invalid_argument, "belief and chain dimensions differ");
  if (const auto& rn = chain.renewal()) {
    Vector w(p.size());
    for (std::size_t i = 0; i < w.size(); ++i) w[i] = rn->m[i] + rn->lambda * (p[i] - rn->m[i]);
    return Belief::normalized(std::move(w));
  }
  return Belief::normalized(detail::row_times(p.span(), chain.transition()));
}

/// The belief whose drift is q.
///
/// Renewal chains invert the homothety; general chains solve pM = q.
inline Belief drift_preimage(const Belief& q, const MarkovModel& chain) {
  require(q.size() == chain.size(), ErrorCode::invalid_argument, "belief and chain dimensions differ");
  Vector p;
  if (const auto& rn = chain.renewal()) {
    require(rn->lambda > 0.0, ErrorCode::no_preimage, "drift is constant when lambda = 0");
    p.resize(q.size());
    for (std::size_t i = 0; i < p.size(); ++i) p[i] = rn->m[i] + (q[i] - rn->m[i]) / rn->lambda;
  } else {
    const std::size_t n = chain.size();
    Matrix a(n, Vector(n));
    for (std::size_t i = 0; i < n; ++i)
      for (std::size_t j = 0; j < n; ++j) a[i][j] = chain.transition()[j][i];
    auto sol = detail::solve_full_rank(std::move(a), q.weights(), 1e-13);
    if (!sol) fail(ErrorCode::no_preimage, "transition matrix is singular");
    p = std::move(*sol);
  }
  for (double x : p)
    require(x >= -1e-12, ErrorCode::out_of_simplex, "no belief drifts onto the requested point");
  return Belief::normalized(std::move(p));
}

/// Points of the investment frontier on the edges [w-, w+] of the simplex.
inline std::vector<Belief> frontier_extremes(const PayoffStructure& r) {
  std::vector<Belief> out;
  const std::size_t n = r.size();
  for (std::size_t neg : r.negative_order()) {
    for (std::size_t pos : r.positive_states()) {
      const double t = -r[neg] / (r[pos] - r[neg]);
      Vector w(n, 0.0);
      w[pos] = t;
      w[neg] = 1.0 - t;
      Belief e = Belief::normalized(std::move(w));
      if (std::find(out.begin(), out.end(), e) == out.end()) out.push_back(std::move(e));
    }
  }
  return out;
}

}  // namespace persuade
