#pragma once

// Named experiments over an InstanceConfig, their reports, and the random
// instance generators shared with the acceptance suite.

#include <algorithm>
#include <chrono>
#include <cmath>
#include <cstdint>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <functional>
#include <limits>
#include <optional>
#include <random>
#include <sstream>
#include <string>
#include <utility>
#include <vector>

#include "persuade/config.hpp"
#include "persuade/error.hpp"
#include "persuade/evaluate.hpp"
#include "persuade/greedy.hpp"
#include "persuade/grid.hpp"
#include "persuade/model.hpp"
#include "persuade/parallel.hpp"
#include "persuade/splitting.hpp"
#include "persuade/value_iteration.hpp"

namespace persuade {

inline constexpr const char* kVersion = "0.1.0";

/// %.17g, so a printed double reads back to the same bits.
inline std::string format_real(double x) {
  char buf[32];
  std::snprintf(buf, sizeof buf, "%.17g", x);
  return buf;
}

// ---------------------------------------------------------------------------
// Reports

enum class Status { pass, fail, not_applicable };

inline std::string_view to_string(Status s) {
  switch (s) {
    case Status::pass: return "PASS";
    case Status::fail: return "FAIL";
    case Status::not_applicable: return "NOT-APPLICABLE";
  }
  return "?";
}

struct Verdict {
  std::string name;
  Status status = Status::not_applicable;
  double value = std::numeric_limits<double>::quiet_NaN();
  std::string comparison;  // "<=" or ">="
  double tolerance = std::numeric_limits<double>::quiet_NaN();
  std::string note;
};

inline Verdict check_le(std::string name, double value, double bound) {
  return {std::move(name), value <= bound ? Status::pass : Status::fail, value, "<=", bound, {}};
}

inline Verdict check_ge(std::string name, double value, double bound) {
  return {std::move(name), value >= bound ? Status::pass : Status::fail, value, ">=", bound, {}};
}

inline Verdict not_applicable(std::string name, std::string why) {
  Verdict v;
  v.name = std::move(name);
  v.note = std::move(why);
  return v;
}

struct Table {
  std::string name;
  std::vector<std::string> header;
  std::vector<std::vector<std::string>> rows;

  void add(std::vector<std::string> row) { rows.push_back(std::move(row)); }

  std::string csv() const {
    std::string out;
    auto line = [&](const std::vector<std::string>& cells) {
      for (std::size_t i = 0; i < cells.size(); ++i) {
        if (i) out += ',';
        out += cells[i];
      }
      out += '\n';
    };
    line(header);
    for (const auto& r : rows) line(r);
    return out;
  }
};

struct ExperimentReport {
  std::string experiment;
  nlohmann::json instance;
  std::uint64_t seed = 0;
  std::vector<std::pair<std::string, double>> quantities;
  std::vector<std::pair<std::string, std::string>> notes;
  std::vector<Verdict> verdicts;
  std::vector<Table> tables;
  double seconds = 0.0;

  void set(const std::string& key, double v) {
    for (auto& [k, x] : quantities)
      if (k == key) {
        x = v;
        return;
      }
    quantities.emplace_back(key, v);
  }

  double get(const std::string& key) const {
    for (const auto& [k, x] : quantities)
      if (k == key) return x;
    fail(ErrorCode::invalid_argument, "report has no quantity '" + key + "'");
  }

  void note(const std::string& key, std::string text) { notes.emplace_back(key, std::move(text)); }

  bool all_pass() const {
    return std::all_of(verdicts.begin(), verdicts.end(), [](const Verdict& v) { return v.status == Status::pass; });
  }

  std::string text() const {
    std::ostringstream os;
    os << "experiment: " << experiment << "\n";
    os << "version: " << kVersion << "  seed: " << seed << "\n";
    os << "instance: " << instance.dump() << "\n";
    if (!quantities.empty()) os << "quantities:\n";
    for (const auto& [k, v] : quantities) os << "  " << k << " = " << format_real(v) << "\n";
    for (const auto& [k, v] : notes) os << "  " << k << ": " << v << "\n";
    if (!verdicts.empty()) os << "verdicts:\n";
    for (const Verdict& v : verdicts) {
      os << "  " << to_string(v.status) << "  " << v.name;
      if (v.status != Status::not_applicable)
        os << ": " << format_real(v.value) << " " << v.comparison << " " << format_real(v.tolerance);
      if (!v.note.empty()) os << "  (" << v.note << ")";
      os << "\n";
    }
    for (const Table& t : tables) os << "table: " << experiment << "_" << t.name << ".csv (" << t.rows.size() << " rows)\n";
    char buf[64];
    std::snprintf(buf, sizeof buf, "%.3f", seconds);
    os << "elapsed: " << buf << " s\n";
    return os.str();
  }

  /// Writes report.txt and one CSV per table into dir.
  void write(const std::filesystem::path& dir) const {
    std::filesystem::create_directories(dir);
    for (const Table& t : tables) {
      std::ofstream out(dir / (experiment + "_" + t.name + ".csv"), std::ios::binary);
      out << t.csv();
    }
    std::ofstream(dir / (experiment + "_report.txt")) << text();
  }
};

// ---------------------------------------------------------------------------
// Sampling

using Rng = std::mt19937_64;

inline double uniform(Rng& rng, double lo = 0.0, double hi = 1.0) { return lo + (hi - lo) * detail::unit_draw(rng); }

/// Uniform on the simplex.
inline Belief random_belief(std::size_t n, Rng& rng) {
  Vector w(n);
  for (double& x : w) x = -std::log(1.0 - detail::unit_draw(rng));
  return Belief::normalized(std::move(w));
}

/// Linear constraints f(p) >= 0 written as coefficient vectors.
using HalfSpaces = std::vector<Vector>;

/// The closed cell of p: the investment region, or O(k).
inline HalfSpaces cell_constraints(const Belief& p, const PayoffStructure& r) {
  const std::size_t n = r.size();
  HalfSpaces out;
  auto partial = [&](std::size_t k, double sign) {
    Vector c(n, 0.0);
    for (std::size_t w : r.positive_states()) c[w] = sign * r[w];
    for (std::size_t i = 0; i < k; ++i) c[r.negative_order()[i]] = sign * r[r.negative_order()[i]];
    return c;
  };
  const std::size_t k = cell_index(p, r);
  if (k == kInvestCell) {
    out.push_back(r.values());
    return out;
  }
  Vector neg(r.values());
  for (double& x : neg) x = -x;
  out.push_back(neg);
  if (k > 1) out.push_back(partial(k - 1, 1.0));
  out.push_back(partial(k, -1.0));
  return out;
}

/// Random point of the polytope {q : c.q >= 0 for c in cons} on a ray from
/// the anchor, which must satisfy the constraints.
inline Belief sample_on_rays(const Belief& anchor, const HalfSpaces& cons, Rng& rng) {
  const Belief u = random_belief(anchor.size(), rng);
  double t_max = 1.0;
  for (const Vector& c : cons) {
    const double f0 = dot(c, anchor.span());
    const double f1 = dot(c, u.span());
    if (f1 < f0) t_max = std::min(t_max, std::max(0.0, f0) / (f0 - f1));
  }
  return Belief::mix(uniform(rng, 0.0, t_max), u, anchor);
}

// ---------------------------------------------------------------------------
// Instances

/// r = (1, -eps/(1-eps), -1), renewal toward the second state, and
/// p1 = 2 eps w1 + (1 - 2 eps) w3.
inline InstanceConfig counterexample_instance(double eps, double delta, double lambda, double h = 1.0 / 150.0) {
  require(eps > 0.0 && eps < 0.25, ErrorCode::invalid_argument, "eps must lie in (0, 1/4)");
  require(delta > 0.0 && delta < 1.0, ErrorCode::invalid_argument, "delta must lie in (0,1)");
  require(lambda >= 0.0 && lambda < 1.0, ErrorCode::invalid_argument, "lambda must lie in [0,1)");
  InstanceConfig c;
  c.states = {"w1", "w2", "w3"};
  c.payoffs = PayoffStructure({1.0, -eps / (1.0 - eps), -1.0});
  c.chain = MarkovModel::renewal(Belief::vertex(3, 1), lambda);
  c.delta = delta;
  c.p1 = Belief::normalized({2.0 * eps, 0.0, 1.0 - 2.0 * eps});
  c.grid_h = h;
  c.experiment = "counterexample";
  c.params = {{"eps", eps}};
  return c;
}

/// Effective ratio of a two-state chain: the second eigenvalue of M.
inline double two_state_ratio(const MarkovModel& chain) {
  require(chain.size() == 2, ErrorCode::invalid_argument, "two-state chain expected");
  return chain.transition()[0][0] - chain.transition()[1][0];
}

/// Cutoff p* and a label for which of the four two-state regimes applies.
inline std::pair<double, std::string> two_state_case(const MarkovModel& chain, const PayoffStructure& r) {
  require(r.size() == 2 && r.positive_states().size() == 1, ErrorCode::not_applicable,
          "two states with one positive and one negative payoff expected");
  const std::size_t pos = r.positive_states()[0];
  const std::size_t neg = 1 - pos;
  const double p_star = -r[neg] / (r[pos] - r[neg]);
  const bool m_invests = chain.invariant()[pos] >= p_star;
  const bool positive = two_state_ratio(chain) >= 0.0;
  return {p_star, std::string(m_invests ? "m>=p*" : "m<p*") + (positive ? ",ratio>=0" : ",ratio<0")};
}

// ---------------------------------------------------------------------------
// Experiments

namespace detail {

inline Table node_table(const SimplexGrid& grid, std::vector<std::string> extra) {
  Table t;
  t.name = "nodes";
  for (std::size_t k = 0; k < grid.states(); ++k) t.header.push_back("p" + std::to_string(k + 1));
  for (auto& e : extra) t.header.push_back(std::move(e));
  return t;
}

inline std::vector<std::string> belief_cells(const Belief& p) {
  std::vector<std::string> out;
  for (double x : p) out.push_back(format_real(x));
  return out;
}

/// Greedy values at every grid node, one evaluator per worker block.
inline std::vector<Interval> greedy_on_grid(const SimplexGrid& grid, const MarkovModel& chain,
                                            const PayoffStructure& r, double delta, std::size_t depth) {
  std::vector<Interval> out(grid.size());
  parallel_blocks(grid.size(), [&](std::size_t lo, std::size_t hi) {
    GreedyEvaluator ev(chain, r, delta, depth);
    for (std::size_t k = lo; k < hi; ++k) out[k] = ev.value(grid.node(k));
  });
  return out;
}

}  // namespace detail

inline ExperimentReport theorem1(const InstanceConfig& c) {
  ExperimentReport rep;
  if (c.size() != 2 || c.payoffs.degenerate()) {
    rep.verdicts.push_back(not_applicable("max |V - gamma| on grid", "needs two states with payoffs of both signs"));
    return rep;
  }
  const auto [p_star, label] = two_state_case(c.chain, c.payoffs);
  rep.note("case", label);
  rep.set("p_star", p_star);
  rep.set("ratio", two_state_ratio(c.chain));
  const SimplexGrid grid = SimplexGrid::with_spacing(2, c.spacing());
  const SolveResult sol = solve(c.delta, c.chain, c.payoffs, grid, c.solve_eps());
  const std::size_t depth = truncation_depth(c.delta, c.tol.truncation);
  const auto gam = detail::greedy_on_grid(grid, c.chain, c.payoffs, c.delta, depth);
  Table t = detail::node_table(grid, {"V", "gamma"});
  double worst = 0.0;
  for (std::size_t k = 0; k < grid.size(); ++k) {
    worst = std::max(worst, std::abs(sol.field.values[k] - gam[k].mid()));
    auto row = detail::belief_cells(grid.node(k));
    row.push_back(format_real(sol.field.values[k]));
    row.push_back(format_real(gam[k].mid()));
    t.add(std::move(row));
  }
  rep.set("iterations", static_cast<double>(sol.iterations));
  rep.set("max_abs_V_minus_gamma", worst);
  rep.set("V_p1", interpolate(sol.field, c.p1));
  rep.set("gamma_p1", GreedyEvaluator(c.chain, c.payoffs, c.delta, depth).value(c.p1).mid());
  rep.verdicts.push_back(check_le("max |V - gamma| on grid", worst, c.tol.grid > 0.0 ? c.tol.grid : 5e-3));
  rep.tables.push_back(std::move(t));
  return rep;
}

inline ExperimentReport theorem2(const InstanceConfig& c) {
  ExperimentReport rep;
  const char* name = "max |gamma - gamma*| over m and its cell";
  if (!c.chain.renewal()) {
    rep.verdicts.push_back(not_applicable(name, "needs a renewal chain"));
    return rep;
  }
  Rng rng(c.seed);
  const Belief& m = c.chain.invariant();
  std::vector<Belief> points{m};
  const auto samples = c.param<std::size_t>("samples", 5);
  const HalfSpaces cell = cell_constraints(m, c.payoffs);
  for (std::size_t i = 0; i < samples; ++i) points.push_back(sample_on_rays(m, cell, rng));
  rep.set("cell", static_cast<double>(cell_index(m, c.payoffs)));

  const auto req = PolicyValueRequest::make(m, c.delta, c.chain, c.payoffs, c.tol.truncation);
  GreedyEvaluator ev(req);
  Table t;
  t.name = "points";
  for (std::size_t k = 0; k < c.size(); ++k) t.header.push_back("p" + std::to_string(k + 1));
  t.header.insert(t.header.end(), {"cell", "gamma", "gamma_star", "difference"});
  double worst = 0.0;
  for (const Belief& p : points) {
    auto r2 = req;
    r2.initial = p;
    const double g = ev.value(p).mid();
    const double gs = first_best_bound(r2);
    worst = std::max(worst, std::abs(g - gs));
    auto row = detail::belief_cells(p);
    row.push_back(std::to_string(cell_index(p, c.payoffs)));
    row.push_back(format_real(g));
    row.push_back(format_real(gs));
    row.push_back(format_real(g - gs));
    t.add(std::move(row));
  }
  rep.set("gamma_m", ev.value(m).mid());
  rep.set("max_abs_gamma_minus_gamma_star", worst);
  rep.verdicts.push_back(check_le(name, worst, 2.0 * c.tol.truncation));
  rep.tables.push_back(std::move(t));
  return rep;
}

struct EntryStats {
  std::size_t trajectories = 0;
  std::size_t entered = 0;
  std::size_t max_theta = 0;
  double mean_theta = 0.0;
  std::vector<std::size_t> thetas;  // 0 marks no entry within the horizon
};

/// Entry times of independent trajectories; trajectory i uses seed + i.
inline EntryStats entry_times(const PolicyValueRequest& req, const Policy& policy, const TargetSet& target,
                              std::size_t trajectories, std::size_t horizon, std::uint64_t seed) {
  EntryStats s;
  s.trajectories = trajectories;
  s.thetas.assign(trajectories, 0);
  parallel_for(trajectories, [&](std::size_t i) {
    const auto rec = simulate_play(req, policy, seed + i, horizon,
                                   [&](const Round& r) { return target.contains(r.posterior, req.payoffs); });
    if (auto th = entry_time(rec, target, req.payoffs)) s.thetas[i] = *th;
  });
  double sum = 0.0;
  for (std::size_t th : s.thetas) {
    if (th == 0) continue;
    ++s.entered;
    sum += static_cast<double>(th);
    s.max_theta = std::max(s.max_theta, th);
  }
  s.mean_theta = s.entered ? sum / static_cast<double>(s.entered) : 0.0;
  return s;
}

inline ExperimentReport theorem3(const InstanceConfig& c) {
  ExperimentReport rep;
  const char* name = "every greedy trajectory enters P within 10 n_bar rounds";
  if (!c.chain.renewal()) {
    rep.verdicts.push_back(not_applicable(name, "needs a renewal chain"));
    return rep;
  }
  const TargetSet target = entry_target(c.chain.invariant(), c.payoffs);
  const auto n_bar = drift_bound(c.chain, c.payoffs, target);
  if (!n_bar) {
    rep.verdicts.push_back(not_applicable(name, "m lies on a boundary of P; no drift bound"));
    return rep;
  }
  rep.set("n_bar", static_cast<double>(*n_bar));
  if (target.polytope) {
    rep.set("P_lower", static_cast<double>(target.polytope->lower));
    rep.set("P_upper", static_cast<double>(target.polytope->upper));
  }
  const auto trajectories = c.param<std::size_t>("trajectories", 10000);
  const std::size_t horizon = 10 * *n_bar;
  const auto req = PolicyValueRequest::make(c.p1, c.delta, c.chain, c.payoffs, c.tol.truncation);

  Table t;
  t.name = "trajectories";
  t.header = {"policy", "trajectory", "theta"};
  auto run = [&](const std::string& label, const Policy& pol) {
    const EntryStats s = entry_times(req, pol, target, trajectories, horizon, c.seed);
    rep.set(label + "_entered", static_cast<double>(s.entered));
    rep.set(label + "_mean_theta", s.mean_theta);
    rep.set(label + "_max_theta", static_cast<double>(s.max_theta));
    for (std::size_t i = 0; i < s.thetas.size(); ++i)
      t.add({label, std::to_string(i), s.thetas[i] ? std::to_string(s.thetas[i]) : "NA"});
    return s;
  };
  const EntryStats g = run("greedy", greedy_policy(c.payoffs));
  rep.verdicts.push_back(check_ge(name, static_cast<double>(g.entered), static_cast<double>(trajectories)));
  if (c.size() <= 3 && c.param<bool>("grid_policy", true)) {
    const SimplexGrid grid = SimplexGrid::with_spacing(c.size(), c.spacing());
    const SolveResult sol = solve(c.delta, c.chain, c.payoffs, grid, c.solve_eps());
    const EntryStats o = run("grid_optimal", grid_policy(sol.field, c.delta, c.chain, c.payoffs));
    rep.note("grid_optimal", std::to_string(o.entered) + " of " + std::to_string(trajectories) +
                                 " trajectories entered within the horizon (informational)");
  }
  rep.tables.push_back(std::move(t));
  return rep;
}

/// Which concavity hypothesis an instance meets, if any.
inline std::optional<std::string> theorem4_hypothesis(const MarkovModel& chain, const PayoffStructure& r) {
  if (r.size() != 3 || !chain.renewal() || r.degenerate()) return std::nullopt;
  if (r.negative_order().size() == 1) return "one negative state";
  if (ell(1, chain.invariant(), r) >= -kCellTol) return "two negative states, m in I or J0";
  return std::nullopt;
}

struct Theorem4Stats {
  double concavity_violation = 0.0;  // max over segments of (g(a)+g(b))/2 - g(mid)
  std::size_t violations = 0;        // segments above 1e-6
  double min_excess = std::numeric_limits<double>::infinity();
  double max_abs_V_minus_gamma = 0.0;
  double max_V_minus_gamma = -std::numeric_limits<double>::infinity();
  std::size_t iterations = 0;
};

inline Theorem4Stats theorem4_stats(const MarkovModel& chain, const PayoffStructure& r, double delta,
                                    std::size_t segments, std::size_t samples, double h, double solve_eps,
                                    double truncation_tol, std::uint64_t seed,
                                    std::vector<std::vector<double>>* node_rows = nullptr) {
  Theorem4Stats st;
  const std::size_t depth = truncation_depth(delta, truncation_tol);
  Rng rng(seed);
  std::vector<std::array<Belief, 2>> segs(segments);
  for (auto& s : segs) s = {random_belief(3, rng), random_belief(3, rng)};
  std::vector<Belief> pts(samples);
  for (auto& p : pts) p = random_belief(3, rng);

  std::vector<double> viol(segments), exc(samples);
  parallel_blocks(segments, [&](std::size_t lo, std::size_t hi) {
    GreedyEvaluator ev(chain, r, delta, depth);
    for (std::size_t i = lo; i < hi; ++i) {
      const Belief mid = Belief::mix(0.5, segs[i][0], segs[i][1]);
      viol[i] = 0.5 * (ev.value(segs[i][0]).mid() + ev.value(segs[i][1]).mid()) - ev.value(mid).mid();
    }
  });
  parallel_blocks(samples, [&](std::size_t lo, std::size_t hi) {
    GreedyEvaluator ev(chain, r, delta, depth);
    for (std::size_t i = lo; i < hi; ++i) exc[i] = ev.excess(pts[i]).mid();
  });
  for (double v : viol) {
    st.concavity_violation = std::max(st.concavity_violation, v);
    if (v > 1e-6) ++st.violations;
  }
  for (double d : exc) st.min_excess = std::min(st.min_excess, d);

  const SimplexGrid grid = SimplexGrid::with_spacing(3, h);
  const SolveResult sol = solve(delta, chain, r, grid, solve_eps);
  st.iterations = sol.iterations;
  const auto gam = detail::greedy_on_grid(grid, chain, r, delta, depth);
  for (std::size_t k = 0; k < grid.size(); ++k) {
    const double diff = sol.field.values[k] - gam[k].mid();
    st.max_abs_V_minus_gamma = std::max(st.max_abs_V_minus_gamma, std::abs(diff));
    st.max_V_minus_gamma = std::max(st.max_V_minus_gamma, diff);
    if (node_rows) {
      const Belief p = grid.node(k);
      node_rows->push_back({p[0], p[1], p[2], sol.field.values[k], gam[k].mid()});
    }
  }
  return st;
}

inline ExperimentReport theorem4(const InstanceConfig& c) {
  ExperimentReport rep;
  const auto hyp = theorem4_hypothesis(c.chain, c.payoffs);
  if (!hyp) {
    for (const char* n : {"gamma concavity", "min d", "max |V - gamma| on grid"})
      rep.verdicts.push_back(not_applicable(n, "needs a three-state renewal chain with one negative state, "
                                               "or two with m in I or J0"));
    return rep;
  }
  rep.note("hypothesis", *hyp);
  std::vector<std::vector<double>> rows;
  const Theorem4Stats st = theorem4_stats(c.chain, c.payoffs, c.delta, c.param<std::size_t>("segments", 10000),
                                          c.param<std::size_t>("samples", 10000), c.spacing(), c.solve_eps(),
                                          c.param<double>("truncation", 1e-8), c.seed, &rows);
  rep.set("concavity_violation", st.concavity_violation);
  rep.set("segments_violating", static_cast<double>(st.violations));
  rep.set("min_d", st.min_excess);
  rep.set("max_abs_V_minus_gamma", st.max_abs_V_minus_gamma);
  rep.set("iterations", static_cast<double>(st.iterations));
  rep.verdicts.push_back(check_le("gamma concavity", st.concavity_violation, 1e-6));
  rep.verdicts.push_back(check_ge("min d", st.min_excess, -1e-6));
  rep.verdicts.push_back(
      check_le("max |V - gamma| on grid", st.max_abs_V_minus_gamma, c.tol.grid > 0.0 ? c.tol.grid : 1e-2));
  Table t = detail::node_table(SimplexGrid(3, 1), {"V", "gamma"});
  for (const auto& row : rows) {
    std::vector<std::string> cells;
    for (double x : row) cells.push_back(format_real(x));
    t.add(std::move(cells));
  }
  rep.tables.push_back(std::move(t));
  return rep;
}

inline ExperimentReport counterexample(const InstanceConfig& c) {
  ExperimentReport rep;
  if (!c.params.contains("eps")) fail(ErrorCode::config, "counterexample needs 'params.eps'");
  const double eps = c.param<double>("eps", 0.0);
  const double delta = c.delta;
  const std::size_t depth = truncation_depth(delta, c.tol.truncation);
  const Interval g = GreedyEvaluator(c.chain, c.payoffs, delta, depth).value(c.p1);
  const SimplexGrid grid = SimplexGrid::with_spacing(3, c.spacing());
  const SolveResult sol = solve(delta, c.chain, c.payoffs, grid, c.solve_eps());
  const double v = interpolate(sol.field, c.p1);
  const double bound = delta * (1.0 - delta) / (2.0 * (1.0 - eps));
  const double grid_tol = c.tol.grid > 0.0 ? c.tol.grid : 0.01;

  // One silent round, then split p2 between (eps, 1-eps, 0) and (eps, 0, 1-eps).
  const Belief p2 = drift(c.p1, c.chain);
  const Belief up = Belief::normalized({eps, 1.0 - eps, 0.0});
  const Belief down = Belief::normalized({eps, 0.0, 1.0 - eps});
  double alt_weight = std::numeric_limits<double>::quiet_NaN();
  try {
    const Splitting alt = make_splitting(p2, {{0.5 / (1.0 - eps), up}, {1.0 - 0.5 / (1.0 - eps), down}});
    alt_weight = alt.investment_probability(c.payoffs);
  } catch (const Error&) {
  }

  rep.set("gamma_p1", g.mid());
  rep.set("gamma_p1_half_width", g.half_width());
  rep.set("V_p1", v);
  rep.set("alternative_bound", bound);
  rep.set("alternative_investment_probability", alt_weight);
  rep.set("V_minus_gamma", v - g.mid());
  rep.set("iterations", static_cast<double>(sol.iterations));
  rep.verdicts.push_back(check_le("greedy value at p1", g.mid(), 4.0 * eps + 1e-4));
  rep.verdicts.push_back(check_ge("grid value at p1", v, bound - grid_tol));
  rep.verdicts.push_back(check_ge("V - gamma at p1", v - g.mid(), bound - grid_tol - (4.0 * eps + 1e-4)));

  Table t = detail::node_table(grid, {"V"});
  for (std::size_t k = 0; k < grid.size(); ++k) {
    auto row = detail::belief_cells(grid.node(k));
    row.push_back(format_real(sol.field.values[k]));
    t.add(std::move(row));
  }
  rep.tables.push_back(std::move(t));
  return rep;
}

inline ExperimentReport breakpoints_experiment(const InstanceConfig& c) {
  ExperimentReport rep;
  BreakpointSequence seq;
  try {
    seq = breakpoints(c.chain, c.payoffs);
  } catch (const Error& e) {
    if (e.code() != ErrorCode::not_applicable) throw;
    rep.verdicts.push_back(not_applicable("breakpoint construction", e.what()));
    return rep;
  }
  rep.set("K", static_cast<double>(seq.K));
  const std::size_t depth = truncation_depth(c.delta, c.tol.truncation);
  GreedyEvaluator ev(c.chain, c.payoffs, c.delta, depth);
  Table t;
  t.name = "breakpoints";
  t.header = {"k"};
  for (const char* pre : {"O", "P"})
    for (std::size_t i = 0; i < 3; ++i) t.header.push_back(std::string(pre) + "_" + std::to_string(i + 1));
  t.header.push_back("d_O");
  double drift_err = 0.0, line_err = 0.0, d_worst = 0.0, order_gap = std::numeric_limits<double>::infinity();
  for (std::size_t k = 0; k < seq.O.size(); ++k) {
    drift_err = std::max(drift_err, l1_distance(drift(seq.O[k], c.chain).span(), seq.P[k].span()));
    if (k > 0) {
      // P_{k+1} on the segment [B+, O_k]: parametrize by the A coordinate.
      const double s = seq.P[k][seq.A] / seq.b_plus[seq.A];
      Vector on(3);
      for (std::size_t i = 0; i < 3; ++i) on[i] = s * seq.b_plus[i] + (1.0 - s) * seq.O[k - 1][i];
      line_err = std::max(line_err, sup_distance(on, seq.P[k].weights()) + std::max({0.0, -s, s - 1.0}));
      order_gap = std::min(order_gap, seq.O[k][seq.B] - seq.O[k - 1][seq.B]);
    }
    const double d = ev.excess(seq.O[k]).mid();
    d_worst = std::max(d_worst, std::abs(d));
    std::vector<std::string> row{std::to_string(k + 1)};
    for (double x : seq.O[k]) row.push_back(format_real(x));
    for (double x : seq.P[k]) row.push_back(format_real(x));
    row.push_back(format_real(d));
    t.add(std::move(row));
  }
  rep.set("max_drift_error", drift_err);
  rep.set("max_segment_error", line_err);
  rep.set("max_abs_d_O", d_worst);
  rep.verdicts.push_back(check_le("drift(O_k) = P_k", drift_err, 1e-10));
  rep.verdicts.push_back(check_le("P_{k+1} on [B+, O_k]", line_err, 1e-9));
  rep.verdicts.push_back(check_le("d(O_k) = 0", d_worst, 2.0 * c.tol.truncation));
  if (seq.O.size() > 1) rep.verdicts.push_back(check_ge("O strictly ordered toward B", order_gap, 1e-15));
  rep.tables.push_back(std::move(t));
  return rep;
}

/// Informational scan over (delta, lambda) with m, r and p1 from the
/// config. Needs a three-state renewal chain.
inline ExperimentReport explore_delta_lambda(const InstanceConfig& c) {
  ExperimentReport rep;
  if (!c.chain.renewal() || c.size() != 3) fail(ErrorCode::config, "explore-delta-lambda needs a three-state renewal chain");
  const auto deltas = c.param<std::vector<double>>("deltas", {0.5, 0.7, 0.9, 0.95});
  const auto lambdas = c.param<std::vector<double>>("lambdas", {0.5, 0.8, 0.9, 0.95});
  const auto samples = c.param<std::size_t>("samples", 2000);
  Table t;
  t.name = "scan";
  t.header = {"delta", "lambda", "V_p1", "gamma_p1", "gamma_star_p1", "min_d", "concavity_violation",
              "max_abs_V_minus_gamma"};
  const Belief& m = c.chain.invariant();
  for (double d : deltas) {
    for (double l : lambdas) {
      const MarkovModel chain = MarkovModel::renewal(m, l);
      const Theorem4Stats st =
          theorem4_stats(chain, c.payoffs, d, samples, samples, c.spacing(), c.solve_eps(), 1e-8, c.seed);
      const auto req = PolicyValueRequest::make(c.p1, d, chain, c.payoffs, 1e-8);
      const SolveResult sol = solve(d, chain, c.payoffs, SimplexGrid::with_spacing(3, c.spacing()), c.solve_eps());
      t.add({format_real(d), format_real(l), format_real(interpolate(sol.field, c.p1)),
             format_real(greedy_value(req)), format_real(first_best_bound(req)), format_real(st.min_excess),
             format_real(st.concavity_violation), format_real(st.max_abs_V_minus_gamma)});
    }
  }
  rep.note("verdicts", "none; this scan is informational");
  rep.tables.push_back(std::move(t));
  return rep;
}

inline ExperimentReport run_experiment(const InstanceConfig& c) {
  const auto start = std::chrono::steady_clock::now();
  ExperimentReport rep;
  if (c.experiment == "theorem1") rep = theorem1(c);
  else if (c.experiment == "theorem2") rep = theorem2(c);
  else if (c.experiment == "theorem3") rep = theorem3(c);
  else if (c.experiment == "theorem4") rep = theorem4(c);
  else if (c.experiment == "counterexample") rep = counterexample(c);
  else if (c.experiment == "breakpoints") rep = breakpoints_experiment(c);
  else if (c.experiment == "explore-delta-lambda") rep = explore_delta_lambda(c);
  else fail(ErrorCode::config, "unknown experiment '" + c.experiment + "'");
  rep.experiment = c.experiment;
  rep.instance = to_json(c);
  rep.seed = c.seed;
  if (c.payoffs.degenerate()) rep.note("warning", "payoffs do not take both signs; the problem is degenerate");
  rep.seconds = std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();
  return rep;
}

}  // namespace persuade
