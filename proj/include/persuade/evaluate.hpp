#pragma once

// Policy evaluation: the greedy value, its first-best upper bound, seeded
// play simulation, entry times into the stability polytope, and the
// breakpoint construction for three-state renewal chains.

#include <array>
#include <bit>
#include <cmath>
#include <cstddef>
#include <cstdint>
#include <functional>
#include <limits>
#include <optional>
#include <random>
#include <string>
#include <unordered_map>
#include <utility>
#include <vector>

#include "persuade/error.hpp"
#include "persuade/greedy.hpp"
#include "persuade/model.hpp"
#include "persuade/splitting.hpp"

namespace persuade {

inline constexpr double kDefaultTruncationTol = 1e-6;

struct Interval {
  double lo = 0.0;
  double hi = 1.0;

  double mid() const noexcept { return 0.5 * (lo + hi); }
  double half_width() const noexcept { return 0.5 * (hi - lo); }
};

/// Smallest N with delta^N <= tol.
inline std::size_t truncation_depth(double delta, double tol = kDefaultTruncationTol) {
  require(delta >= 0.0 && delta < 1.0, ErrorCode::invalid_argument, "discount must lie in [0,1)");
  require(tol > 0.0 && tol < 1.0, ErrorCode::invalid_argument, "truncation tolerance must lie in (0,1)");
  if (delta == 0.0) return 1;
  auto n = static_cast<std::size_t>(std::ceil(std::log(tol) / std::log(delta)));
  while (std::pow(delta, static_cast<double>(n)) > tol) ++n;
  return std::max<std::size_t>(n, 1);
}

struct PolicyValueRequest {
  Belief initial;
  double discount = 0.0;
  MarkovModel chain;
  PayoffStructure payoffs;
  std::size_t truncation_depth = 1;

  static PolicyValueRequest make(Belief initial, double discount, MarkovModel chain, PayoffStructure payoffs,
                                 double tol = kDefaultTruncationTol) {
    require(initial.size() == chain.size() && chain.size() == payoffs.size(), ErrorCode::invalid_argument,
            "inconsistent instance dimensions");
    const std::size_t depth = persuade::truncation_depth(discount, tol);
    return {std::move(initial), discount, std::move(chain), std::move(payoffs), depth};
  }
};

namespace detail {

/// Rounds each coordinate to a multiple of 1e-12.
inline Belief quantize(const Belief& p) {
  Vector v(p.size());
  for (std::size_t i = 0; i < p.size(); ++i) v[i] = static_cast<double>(std::llround(p[i] * 1e12)) * 1e-12;
  return Belief(std::move(v));
}

/// 128-bit fingerprint of a quantized belief together with a remaining depth.
struct MemoKey {
  std::uint64_t h1 = 0, h2 = 0;
  bool operator==(const MemoKey&) const = default;
};

struct MemoKeyHash {
  std::size_t operator()(const MemoKey& k) const noexcept { return static_cast<std::size_t>(k.h1); }
};

inline std::uint64_t mix64(std::uint64_t x) {
  x ^= x >> 30;
  x *= 0xbf58476d1ce4e5b9ULL;
  x ^= x >> 27;
  x *= 0x94d049bb133111ebULL;
  x ^= x >> 31;
  return x;
}

inline MemoKey memo_key(const Belief& p, std::size_t depth) {
  MemoKey k{0x9e3779b97f4a7c15ULL ^ depth, 0xc2b2ae3d27d4eb4fULL + depth};
  for (std::size_t i = 0; i < p.size(); ++i) {
    const auto v = std::bit_cast<std::uint64_t>(p[i]);
    k.h1 = mix64(k.h1 ^ v);
    k.h2 = mix64(k.h2 + v * 0xff51afd7ed558ccdULL);
  }
  return k;
}

}  // namespace detail

/// Evaluates the greedy value by unrolling the two-branch recursion to a
/// fixed depth and bounding the tail by [0, delta^depth].
///
/// Beliefs are rounded to 1e-12 before evaluation and memoized per rounded
/// belief and remaining depth, so a value does not depend on evaluation order. The memo is flushed when it grows
/// past about a million entries. Not thread-safe; use one evaluator
/// per thread.
class GreedyEvaluator {
 public:
  GreedyEvaluator(MarkovModel chain, PayoffStructure payoffs, double delta, std::size_t depth,
                  std::size_t node_budget = 20'000'000)
      : chain_(std::move(chain)),
        payoffs_(std::move(payoffs)),
        delta_(delta),
        depth_(depth),
        budget_(node_budget) {
    require(delta >= 0.0 && delta < 1.0, ErrorCode::invalid_argument, "discount must lie in [0,1)");
    require(chain_.size() == payoffs_.size(), ErrorCode::invalid_argument, "chain and payoff dimensions differ");
  }

  explicit GreedyEvaluator(const PolicyValueRequest& req)
      : GreedyEvaluator(req.chain, req.payoffs, req.discount, req.truncation_depth) {}

  Interval value(const Belief& p) { return eval(p, depth_); }

  /// d(p) = gamma(p) - delta * gamma(drift(p)).
  Interval excess(const Belief& p) {
    const Interval here = value(p);
    const Interval next = value(drift(p, chain_));
    return {here.lo - delta_ * next.hi, here.hi - delta_ * next.lo};
  }

  double delta() const noexcept { return delta_; }
  std::size_t depth() const noexcept { return depth_; }
  std::size_t cache_size() const noexcept { return cache_.size(); }
  std::size_t expansions() const noexcept { return expansions_; }
  const MarkovModel& chain() const noexcept { return chain_; }
  const PayoffStructure& payoffs() const noexcept { return payoffs_; }

 private:
  Interval eval(const Belief& raw, std::size_t depth) {
    if (depth == 0) return {0.0, 1.0};
    const Belief p = detail::quantize(raw);
    const detail::MemoKey key = detail::memo_key(p, depth);
    if (auto it = cache_.find(key); it != cache_.end()) return it->second;
    if (++expansions_ > budget_) fail(ErrorCode::budget_exceeded, "greedy evaluation exceeded its node budget");

    const double stay = 1.0 - delta_;
    Interval out;
    if (invests(p, payoffs_)) {
      const Interval next = eval(drift(p, chain_), depth - 1);
      out = {stay + delta_ * next.lo, stay + delta_ * next.hi};
    } else {
      const GreedySplit g = greedy_split(p, payoffs_);
      out = {0.0, 0.0};
      if (g.q_I && g.a_I > 0.0) {
        const Interval next = eval(drift(*g.q_I, chain_), depth - 1);
        out.lo += g.a_I * (stay + delta_ * next.lo);
        out.hi += g.a_I * (stay + delta_ * next.hi);
      }
      if (g.q_J && g.a_J > 0.0) {
        const Interval next = eval(drift(*g.q_J, chain_), depth - 1);
        out.lo += g.a_J * delta_ * next.lo;
        out.hi += g.a_J * delta_ * next.hi;
      }
    }
    if (cache_.size() >= kMaxCacheEntries) cache_.clear();
    cache_.emplace(key, out);
    return out;
  }

  MarkovModel chain_;
  PayoffStructure payoffs_;
  double delta_;
  std::size_t depth_;
  std::size_t budget_;
  std::size_t expansions_ = 0;
  static constexpr std::size_t kMaxCacheEntries = std::size_t{1} << 20;
  std::unordered_map<detail::MemoKey, Interval, detail::MemoKeyHash> cache_;
};

inline Interval greedy_value_bounds(const PolicyValueRequest& req) {
  GreedyEvaluator ev(req);
  return ev.value(req.initial);
}

inline double greedy_value(const PolicyValueRequest& req) { return greedy_value_bounds(req).mid(); }

inline double excess(const Belief& p, const PolicyValueRequest& req) {
  GreedyEvaluator ev(req);
  return ev.excess(p).mid();
}

/// (1 - delta) * sum_n delta^(n-1) * rhat(drift^(n-1)(p1)), truncated.
inline Interval first_best_bounds(const PolicyValueRequest& req) {
  Belief p = req.initial;
  double sum = 0.0;
  double weight = 1.0 - req.discount;
  for (std::size_t n = 0; n < req.truncation_depth; ++n) {
    sum += weight * max_stage_payoff(p, req.payoffs);
    weight *= req.discount;
    p = drift(p, req.chain);
  }
  return {sum, sum + std::pow(req.discount, static_cast<double>(req.truncation_depth))};
}

inline double first_best_bound(const PolicyValueRequest& req) { return first_best_bounds(req).mid(); }

// ---------------------------------------------------------------------------
// Simulation

/// Maps the current (pre-message) belief to the splitting played there.
using Policy = std::function<Splitting(const Belief&)>;

inline Policy greedy_policy(PayoffStructure r) {
  return [r = std::move(r)](const Belief& p) { return greedy_split(p, r).as_splitting(p); };
}

inline Policy no_disclosure_policy() {
  return [](const Belief& p) { return no_disclosure(p); };
}

inline Policy full_disclosure_policy() {
  return [](const Belief& p) { return full_disclosure(p); };
}

struct Round {
  std::size_t state = 0;
  Belief prior;
  std::size_t message = 0;
  Belief posterior;
  bool invest = false;
  double payoff = 0.0;  // (1 - delta) delta^(n-1) when investing
};

struct TrajectoryRecord {
  std::vector<Round> rounds;

  double total_payoff() const {
    double s = 0.0;
    for (const Round& r : rounds) s += r.payoff;
    return s;
  }
};

namespace detail {

/// Uniform double in [0,1) built from the top 53 bits; identical on every
/// standard library, unlike std::uniform_real_distribution.
inline double unit_draw(std::mt19937_64& rng) { return static_cast<double>(rng() >> 11) * 0x1.0p-53; }

template <typename Weights>
std::size_t sample_index(const Weights& weights, std::mt19937_64& rng) {
  const double u = unit_draw(rng);
  double acc = 0.0;
  std::size_t last = 0;
  for (std::size_t i = 0; i < weights.size(); ++i) {
    if (weights[i] <= 0.0) continue;
    acc += weights[i];
    last = i;
    if (u < acc) return i;
  }
  return last;
}

}  // namespace detail

/// Plays `horizon` rounds from req.initial. Deterministic given the seed.
/// When `stop` is set, play ends after the first round for which it returns
/// true.
inline TrajectoryRecord simulate_play(const PolicyValueRequest& req, const Policy& policy, std::uint64_t seed,
                                      std::size_t horizon,
                                      const std::function<bool(const Round&)>& stop = {}) {
  std::mt19937_64 rng(seed);
  TrajectoryRecord rec;
  rec.rounds.reserve(std::min<std::size_t>(horizon, 4096));
  std::size_t state = detail::sample_index(req.initial, rng);
  Belief p = req.initial;
  double weight = 1.0 - req.discount;
  const auto& m = req.chain.transition();
  for (std::size_t n = 0; n < horizon; ++n) {
    const Splitting mu = policy(p);
    const SignalKernel kernel = signal_kernel(mu, p);
    Round round;
    round.state = state;
    round.prior = p;
    round.message = detail::sample_index(kernel.message_probabilities[state], rng);
    round.posterior = mu[round.message].posterior;
    round.invest = invests(round.posterior, req.payoffs);
    round.payoff = round.invest ? weight : 0.0;
    weight *= req.discount;
    p = drift(round.posterior, req.chain);
    state = detail::sample_index(m[state], rng);
    rec.rounds.push_back(std::move(round));
    if (stop && stop(rec.rounds.back())) break;
  }
  return rec;
}

// ---------------------------------------------------------------------------
// Entry into the stability region

/// The polytope around m when m does not invest, otherwise the investment
/// region itself.
struct TargetSet {
  std::optional<Polytope> polytope;

  bool contains(const Belief& q, const PayoffStructure& r) const {
    return polytope ? polytope->contains(q, r) : invests(q, r);
  }
};

inline TargetSet entry_target(const Belief& m, const PayoffStructure& r) {
  if (expected_payoff(m, r) >= -kCellTol) return {};
  return {p_polytope(m, r)};
}

/// First (1-based) round whose posterior lies in the target.
inline std::optional<std::size_t> entry_time(const TrajectoryRecord& trajectory, const TargetSet& target,
                                             const PayoffStructure& r) {
  for (std::size_t n = 0; n < trajectory.rounds.size(); ++n)
    if (target.contains(trajectory.rounds[n].posterior, r)) return n + 1;
  return std::nullopt;
}

/// Smallest n such that drift^n maps the whole simplex strictly inside the
/// half-spaces separating the target from the rest of the noninvestment
/// region. Empty when m lies on one of the separating hyperplanes or the
/// bound exceeds `cap`.
inline std::optional<std::size_t> drift_bound(const MarkovModel& chain, const PayoffStructure& r,
                                              const TargetSet& target, std::size_t cap = 1'000'000) {
  const std::size_t n = chain.size();
  auto inside = [&](const Belief& x) {
    if (!target.polytope) return expected_payoff(x, r) > 0.0;
    const Vector l = ell_values(x, r);
    if (target.polytope->lower > 0 && !(l[target.polytope->lower] > 0.0)) return false;
    return l[target.polytope->upper] < 0.0;
  };
  if (!inside(chain.invariant())) return std::nullopt;
  std::vector<Belief> images;
  for (std::size_t w = 0; w < n; ++w) images.push_back(Belief::vertex(n, w));
  for (std::size_t step = 1; step <= cap; ++step) {
    bool all = true;
    for (Belief& x : images) {
      x = drift(x, chain);
      all = all && inside(x);
    }
    if (all) return step;
  }
  return std::nullopt;
}

// ---------------------------------------------------------------------------
// Breakpoints of the three-state construction with two negative states

/// O_1 = C, O_2, ..., O_K on the edge [B, C], moving from C toward B, with
/// P_k = drift(O_k). Each P_{k+1} lies on the segment [B+, O_k]. J_0 is the
/// triangle (C+, B+, C) and J_k the triangle (B+, O_k, O_{k+1}); the last
/// one, J_K, closes on B.
struct BreakpointSequence {
  std::size_t A = 0, B = 1, C = 2;  // positive state and the two negative states, r(B) >= r(C)
  Belief b_plus, c_plus;
  std::vector<Belief> O;
  std::vector<Belief> P;
  std::size_t K = 0;
};

namespace detail {

/// Chart of the plane of the simplex: (p(B), p(C)).
inline std::array<double, 2> chart(const Belief& p, std::size_t b, std::size_t c) { return {p[b], p[c]}; }

inline double orient(const std::array<double, 2>& a, const std::array<double, 2>& b, const std::array<double, 2>& c) {
  return (b[0] - a[0]) * (c[1] - a[1]) - (b[1] - a[1]) * (c[0] - a[0]);
}

}  // namespace detail

inline BreakpointSequence breakpoints(const MarkovModel& chain, const PayoffStructure& r,
                                      std::size_t max_iterations = 1'000'000) {
  require(r.size() == 3 && chain.size() == 3, ErrorCode::not_applicable, "breakpoints need exactly three states");
  require(chain.renewal().has_value(), ErrorCode::not_applicable, "breakpoints need a renewal chain");
  require(r.negative_order().size() == 2, ErrorCode::not_applicable, "breakpoints need two negative states");
  const Belief& m = chain.invariant();
  require(ell(1, m, r) >= -kCellTol, ErrorCode::not_applicable,
          "invariant measure must lie in the investment region or in the triangle (C+, B+, C)");

  BreakpointSequence seq;
  seq.A = r.positive_states()[0];
  seq.B = r.negative_order()[0];
  seq.C = r.negative_order()[1];
  auto edge_point = [&](std::size_t neg) {
    const double t = -r[neg] / (r[seq.A] - r[neg]);
    Vector w(3, 0.0);
    w[seq.A] = t;
    w[neg] = 1.0 - t;
    return Belief::normalized(std::move(w));
  };
  seq.b_plus = edge_point(seq.B);
  seq.c_plus = edge_point(seq.C);

  const std::size_t bi = seq.B, ci = seq.C;
  auto on_edge = [&](double s) {
    Vector w(3, 0.0);
    w[bi] = s;
    w[ci] = 1.0 - s;
    return Belief::normalized(std::move(w));
  };
  const auto bp = detail::chart(seq.b_plus, bi, ci);
  const Belief vb = Belief::vertex(3, bi);
  const auto phi_b = detail::chart(drift(vb, chain), bi, ci);
  const auto b_chart = detail::chart(vb, bi, ci);

  seq.O.push_back(on_edge(0.0));
  seq.P.push_back(drift(seq.O.back(), chain));
  double s_prev = 0.0;
  for (std::size_t k = 1; k <= max_iterations; ++k) {
    const auto ok = detail::chart(seq.O.back(), bi, ci);
    const double side_b = detail::orient(bp, ok, b_chart);
    const double side_phi = detail::orient(bp, ok, phi_b);
    // drift(B) already on the far side of the line (B+, O_k): B is covered.
    if (side_b * side_phi <= 0.0) {
      seq.K = k;
      return seq;
    }
    // Solve orient(B+, O_k, drift(C + s (B - C))) = 0, which is affine in s.
    const auto g0 = detail::orient(bp, ok, detail::chart(drift(on_edge(0.0), chain), bi, ci));
    const auto g1 = detail::orient(bp, ok, detail::chart(drift(on_edge(1.0), chain), bi, ci)) - g0;
    require(g1 != 0.0, ErrorCode::divergence, "breakpoint equation is degenerate");
    const double s = -g0 / g1;
    require(s > s_prev && s < 1.0, ErrorCode::divergence, "breakpoints are not monotone toward B");
    s_prev = s;
    seq.O.push_back(on_edge(s));
    seq.P.push_back(drift(seq.O.back(), chain));
  }
  fail(ErrorCode::divergence, "breakpoint construction did not terminate");
}

/// Region of the breakpoint decomposition containing p: -1 for the
/// investment region, 0 for J_0, k for J_k.
inline int breakpoint_region(const BreakpointSequence& seq, const Belief& p, const PayoffStructure& r) {
  if (invests(p, r)) return -1;
  if (ell(1, p, r) >= -kCellTol) return 0;
  // p lies in the triangle (B, B+, C); the ray from B+ through p meets the
  // edge [B, C] at the point with B-coordinate t.
  const double alpha = p[seq.A] / seq.b_plus[seq.A];
  const double t = alpha < 1.0 ? (p[seq.B] - alpha * seq.b_plus[seq.B]) / (1.0 - alpha) : 1.0;
  for (std::size_t k = 1; k < seq.K; ++k) {
    if (t <= seq.O[k][seq.B] + 1e-15) return static_cast<int>(k);
  }
  return static_cast<int>(seq.K);
}

}  // namespace persuade
