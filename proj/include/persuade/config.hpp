#pragma once

// JSON instance configuration.
//
//   {
//     "states": ["w1", "w2", "w3"],
//     "r": [1, -0.0101, -1],
//     "chain": {"kind": "renewal", "m": [0, 1, 0], "lambda": 0.5},
//     "delta": 0.5,
//     "p1": [0.02, 0, 0.98],
//     "grid": {"h": 0.0066666666666666671},
//     "tol": {"truncation": 1e-6, "solve": 1e-4, "grid": 0.01},
//     "seed": 1,
//     "experiment": "counterexample",
//     "params": {"eps": 0.01}
//   }
//
// A matrix chain is {"kind": "matrix", "matrix": [[...], ...]} with an
// optional "m" when the chain is reducible.

#include <cstddef>
#include <cstdint>
#include <fstream>
#include <optional>
#include <sstream>
#include <string>
#include <utility>
#include <vector>

#include "json.hpp"

#include "persuade/error.hpp"
#include "persuade/model.hpp"

namespace persuade {

struct Tolerances {
  double truncation = 1e-6;  // greedy value tail bound
  double solve = 0.0;        // value iteration; 0 picks 1e-6 for two states and 1e-4 for three
  double grid = 0.0;         // |V - gamma| allowance; 0 picks the experiment default
};

struct InstanceConfig {
  std::vector<std::string> states;
  PayoffStructure payoffs;
  MarkovModel chain;
  double delta = 0.0;
  Belief p1;
  double grid_h = 0.0;  // 0 picks 1/2000 for two states and 1/150 for three
  Tolerances tol;
  std::uint64_t seed = 1;
  std::string experiment;
  nlohmann::json params = nlohmann::json::object();

  std::size_t size() const noexcept { return payoffs.size(); }

  double solve_eps() const {
    if (tol.solve > 0.0) return tol.solve;
    return size() == 2 ? 1e-6 : 1e-4;
  }

  double spacing() const {
    if (grid_h > 0.0) return grid_h;
    return size() == 2 ? 1.0 / 2000.0 : 1.0 / 150.0;
  }

  template <typename T>
  T param(const std::string& key, T fallback) const {
    if (!params.contains(key)) return fallback;
    try {
      return params.at(key).get<T>();
    } catch (const nlohmann::json::exception&) {
      fail(ErrorCode::config, "field 'params." + key + "' has the wrong type");
    }
  }
};

inline const std::vector<std::string>& known_experiments() {
  static const std::vector<std::string> names{"theorem1",       "theorem2",   "theorem3",
                                              "theorem4",       "counterexample", "breakpoints",
                                              "explore-delta-lambda"};
  return names;
}

namespace detail {

inline std::string line_column(const std::string& text, std::size_t byte) {
  std::size_t line = 1, col = 1;
  for (std::size_t i = 0; i < byte && i < text.size(); ++i) {
    if (text[i] == '\n') {
      ++line;
      col = 1;
    } else {
      ++col;
    }
  }
  return "line " + std::to_string(line) + ", column " + std::to_string(col);
}

inline const nlohmann::json& field(const nlohmann::json& obj, const std::string& path, const std::string& key) {
  if (!obj.is_object() || !obj.contains(key)) fail(ErrorCode::config, "missing field '" + path + key + "'");
  return obj.at(key);
}

inline double number(const nlohmann::json& v, const std::string& name) {
  if (!v.is_number()) fail(ErrorCode::config, "field '" + name + "' must be a number");
  return v.get<double>();
}

inline Vector numbers(const nlohmann::json& v, const std::string& name) {
  if (!v.is_array()) fail(ErrorCode::config, "field '" + name + "' must be an array of numbers");
  Vector out;
  for (std::size_t i = 0; i < v.size(); ++i) out.push_back(number(v[i], name + "[" + std::to_string(i) + "]"));
  return out;
}

/// Runs a model constructor and rewraps its error as a config error naming
/// the field.
template <typename Fn>
auto validated(const std::string& name, Fn&& fn) -> decltype(fn()) {
  try {
    return fn();
  } catch (const Error& e) {
    fail(ErrorCode::config, "field '" + name + "': " + e.what());
  }
}

}  // namespace detail

inline InstanceConfig parse_config(const nlohmann::json& j) {
  using detail::field;
  using detail::number;
  using detail::numbers;
  using detail::validated;
  if (!j.is_object()) fail(ErrorCode::config, "configuration must be a JSON object");

  const Vector r = numbers(field(j, "", "r"), "r");
  if (r.empty()) fail(ErrorCode::config, "field 'r' is empty");
  const std::size_t n = r.size();
  auto sized = [&](const Vector& v, const std::string& name) {
    if (v.size() != n)
      fail(ErrorCode::config, "field '" + name + "' has " + std::to_string(v.size()) + " entries, expected " +
                                  std::to_string(n));
    return v;
  };

  InstanceConfig c;
  c.payoffs = PayoffStructure(r);
  if (j.contains("states")) {
    const auto& s = j.at("states");
    if (!s.is_array()) fail(ErrorCode::config, "field 'states' must be an array of names");
    for (const auto& name : s) {
      if (!name.is_string()) fail(ErrorCode::config, "field 'states' must be an array of names");
      c.states.push_back(name.get<std::string>());
    }
    if (c.states.size() != n) fail(ErrorCode::config, "field 'states' does not match the length of 'r'");
  } else {
    for (std::size_t i = 0; i < n; ++i) c.states.push_back("w" + std::to_string(i + 1));
  }

  const auto& ch = field(j, "", "chain");
  const auto& kind = field(ch, "chain.", "kind");
  if (!kind.is_string()) fail(ErrorCode::config, "field 'chain.kind' must be \"renewal\" or \"matrix\"");
  if (kind == "renewal") {
    const Vector m = sized(numbers(field(ch, "chain.", "m"), "chain.m"), "chain.m");
    const double lambda = number(field(ch, "chain.", "lambda"), "chain.lambda");
    const Belief mb = validated("chain.m", [&] { return Belief(m); });
    c.chain = validated("chain.lambda", [&] { return MarkovModel::renewal(mb, lambda); });
  } else if (kind == "matrix") {
    const auto& mj = field(ch, "chain.", "matrix");
    if (!mj.is_array() || mj.size() != n)
      fail(ErrorCode::config, "field 'chain.matrix' must have " + std::to_string(n) + " rows");
    Matrix m;
    for (std::size_t i = 0; i < n; ++i)
      m.push_back(sized(numbers(mj[i], "chain.matrix[" + std::to_string(i) + "]"),
                        "chain.matrix[" + std::to_string(i) + "]"));
    if (ch.contains("m")) {
      const Belief inv = validated("chain.m", [&] { return Belief(sized(numbers(ch.at("m"), "chain.m"), "chain.m")); });
      c.chain = validated("chain.matrix", [&] { return MarkovModel::from_matrix(m, inv); });
    } else {
      c.chain = validated("chain.matrix", [&] { return MarkovModel::from_matrix(m); });
    }
  } else {
    fail(ErrorCode::config, "field 'chain.kind' must be \"renewal\" or \"matrix\"");
  }

  c.delta = number(field(j, "", "delta"), "delta");
  if (!(c.delta >= 0.0 && c.delta < 1.0)) fail(ErrorCode::config, "field 'delta' must lie in [0,1)");

  if (j.contains("p1")) {
    const Vector p = sized(numbers(j.at("p1"), "p1"), "p1");
    c.p1 = validated("p1", [&] { return Belief(p); });
  } else {
    c.p1 = c.chain.invariant();
  }

  if (j.contains("grid")) {
    const auto& g = j.at("grid");
    if (!g.is_object()) fail(ErrorCode::config, "field 'grid' must be an object");
    if (g.contains("h")) {
      c.grid_h = number(g.at("h"), "grid.h");
      if (!(c.grid_h > 0.0 && c.grid_h <= 1.0)) fail(ErrorCode::config, "field 'grid.h' must lie in (0,1]");
    }
  }
  if (j.contains("tol")) {
    const auto& t = j.at("tol");
    if (!t.is_object()) fail(ErrorCode::config, "field 'tol' must be an object");
    auto positive = [&](const char* key, double& out) {
      if (!t.contains(key)) return;
      out = number(t.at(key), std::string("tol.") + key);
      if (!(out > 0.0)) fail(ErrorCode::config, std::string("field 'tol.") + key + "' must be positive");
    };
    positive("truncation", c.tol.truncation);
    positive("solve", c.tol.solve);
    positive("grid", c.tol.grid);
    if (c.tol.truncation >= 1.0) fail(ErrorCode::config, "field 'tol.truncation' must be below 1");
  }
  if (j.contains("seed")) {
    const auto& s = j.at("seed");
    if (!s.is_number_unsigned() && !(s.is_number_integer() && s.get<std::int64_t>() >= 0))
      fail(ErrorCode::config, "field 'seed' must be a nonnegative integer");
    c.seed = s.get<std::uint64_t>();
  }

  const auto& e = field(j, "", "experiment");
  if (!e.is_string()) fail(ErrorCode::config, "field 'experiment' must be a string");
  c.experiment = e.get<std::string>();
  bool known = false;
  for (const auto& name : known_experiments()) known = known || name == c.experiment;
  if (!known) fail(ErrorCode::config, "unknown experiment '" + c.experiment + "'");

  if (j.contains("params")) {
    if (!j.at("params").is_object()) fail(ErrorCode::config, "field 'params' must be an object");
    c.params = j.at("params");
  }
  return c;
}

inline InstanceConfig parse_config_text(const std::string& text) {
  nlohmann::json j;
  try {
    j = nlohmann::json::parse(text);
  } catch (const nlohmann::json::parse_error& e) {
    fail(ErrorCode::config, "parse error at " + detail::line_column(text, e.byte == 0 ? 0 : e.byte - 1) + ": " +
                                e.what());
  }
  return parse_config(j);
}

inline InstanceConfig load_config(const std::string& path) {
  std::ifstream in(path);
  if (!in) fail(ErrorCode::config, "cannot open '" + path + "'");
  std::stringstream buf;
  buf << in.rdbuf();
  return parse_config_text(buf.str());
}

/// JSON echo of a configuration; parse_config(to_json(c)) reproduces c.
inline nlohmann::json to_json(const InstanceConfig& c) {
  nlohmann::json j;
  j["states"] = c.states;
  j["r"] = c.payoffs.values();
  if (const auto& ren = c.chain.renewal()) {
    j["chain"] = {{"kind", "renewal"}, {"m", ren->m.weights()}, {"lambda", ren->lambda}};
  } else {
    j["chain"] = {{"kind", "matrix"}, {"matrix", c.chain.transition()}, {"m", c.chain.invariant().weights()}};
  }
  j["delta"] = c.delta;
  j["p1"] = c.p1.weights();
  j["grid"] = {{"h", c.spacing()}};
  j["tol"] = {{"truncation", c.tol.truncation}, {"solve", c.solve_eps()}};
  if (c.tol.grid > 0.0) j["tol"]["grid"] = c.tol.grid;
  j["seed"] = c.seed;
  j["experiment"] = c.experiment;
  j["params"] = c.params;
  return j;
}

}  // namespace persuade
