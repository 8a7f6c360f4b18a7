#include <gtest/gtest.h>

#include <filesystem>
#include <fstream>
#include <sstream>

#include "persuade/persuade.hpp"

using namespace persuade;

namespace {

std::string config_error(const std::string& text) {
  try {
    parse_config_text(text);
  } catch (const Error& e) {
    EXPECT_EQ(e.code(), ErrorCode::config);
    return e.what();
  }
  ADD_FAILURE() << "expected a config error";
  return {};
}

const char* kTwoState = R"({
  "states": ["good", "bad"],
  "r": [1, -1],
  "chain": {"kind": "matrix", "matrix": [[0.9, 0.1], [0.3, 0.7]]},
  "delta": 0.6,
  "p1": [0.2, 0.8],
  "grid": {"h": 0.005},
  "seed": 4,
  "experiment": "theorem1"
})";

std::string slurp(const std::filesystem::path& p) {
  std::ifstream in(p, std::ios::binary);
  std::stringstream s;
  s << in.rdbuf();
  return s.str();
}

}  // namespace

TEST(Config, ParsesTwoStateMatrixInstance) {
  const InstanceConfig c = parse_config_text(kTwoState);
  EXPECT_EQ(c.states, (std::vector<std::string>{"good", "bad"}));
  EXPECT_EQ(c.size(), 2u);
  EXPECT_FALSE(c.chain.renewal().has_value());
  EXPECT_NEAR(c.chain.invariant()[0], 0.75, 1e-12);
  EXPECT_EQ(c.delta, 0.6);
  EXPECT_EQ(c.seed, 4u);
  EXPECT_EQ(c.spacing(), 0.005);
  EXPECT_EQ(c.solve_eps(), 1e-6);
  EXPECT_EQ(c.tol.truncation, 1e-6);
}

TEST(Config, DefaultsAndRenewal) {
  const InstanceConfig c = parse_config_text(
      R"({"r": [1, -0.5, -1], "chain": {"kind": "renewal", "m": [0.2, 0.5, 0.3], "lambda": 0.4},
          "delta": 0.5, "experiment": "theorem2", "params": {"samples": 3}})");
  EXPECT_EQ(c.states, (std::vector<std::string>{"w1", "w2", "w3"}));
  EXPECT_EQ(c.p1, c.chain.invariant());
  EXPECT_NEAR(c.spacing(), 1.0 / 150.0, 1e-15);
  EXPECT_EQ(c.solve_eps(), 1e-4);
  EXPECT_EQ(c.param<std::size_t>("samples", 5), 3u);
  EXPECT_EQ(c.param<std::size_t>("missing", 5), 5u);
  EXPECT_NEAR(c.chain.renewal()->lambda, 0.4, 1e-15);
}

TEST(Config, RoundTripsThroughJson) {
  const InstanceConfig c = parse_config_text(kTwoState);
  const InstanceConfig d = parse_config(to_json(c));
  EXPECT_EQ(to_json(c).dump(), to_json(d).dump());
  const InstanceConfig e = counterexample_instance(0.02, 0.6, 0.4);
  EXPECT_EQ(to_json(e).dump(), to_json(parse_config(to_json(e))).dump());
}

TEST(Config, Diagnostics) {
  EXPECT_NE(config_error("{\"r\": [1,\n  -1,,]}").find("line 2"), std::string::npos);
  EXPECT_NE(config_error(R"({"chain": {"kind": "renewal"}})").find("'r'"), std::string::npos);
  EXPECT_NE(config_error(R"({"r": [1, -1], "chain": {"kind": "renewal", "m": [0.5, 0.5]}, "delta": 0.5,
                             "experiment": "theorem1"})")
                .find("chain.lambda"),
            std::string::npos);
  EXPECT_NE(config_error(R"({"r": [1, -1], "chain": {"kind": "renewal", "m": [0.5, 0.6], "lambda": 0.5},
                             "delta": 0.5, "experiment": "theorem1"})")
                .find("chain.m"),
            std::string::npos);
  EXPECT_NE(config_error(R"({"r": [1, -1], "chain": {"kind": "renewal", "m": [0.5, 0.5], "lambda": 0.5},
                             "delta": 1.0, "experiment": "theorem1"})")
                .find("delta"),
            std::string::npos);
  EXPECT_NE(config_error(R"({"r": [1, -1], "chain": {"kind": "renewal", "m": [0.5, 0.5], "lambda": 0.5},
                             "delta": 0.5, "p1": [1, 0, 0], "experiment": "theorem1"})")
                .find("p1"),
            std::string::npos);
  EXPECT_NE(config_error(R"({"r": [1, -1], "chain": {"kind": "markov"}, "delta": 0.5, "experiment": "theorem1"})")
                .find("chain.kind"),
            std::string::npos);
  EXPECT_NE(config_error(R"({"r": [1, -1], "chain": {"kind": "renewal", "m": [0.5, 0.5], "lambda": 0.5},
                             "delta": 0.5, "experiment": "nope"})")
                .find("nope"),
            std::string::npos);
  EXPECT_NE(config_error(R"({"r": [1, -1], "chain": {"kind": "matrix", "matrix": [[1, 0], [0, 1]]},
                             "delta": 0.5, "experiment": "theorem1"})")
                .find("chain.matrix"),
            std::string::npos);
  EXPECT_THROW(load_config("/nonexistent/config.json"), Error);
}

TEST(CounterexampleInstance, Geometry) {
  const double eps = 0.01;
  const InstanceConfig c = counterexample_instance(eps, 0.5, 0.5);
  EXPECT_NEAR(expected_payoff(Belief::normalized({eps, 1 - eps, 0.0}), c.payoffs), 0.0, 1e-15);
  EXPECT_NEAR(expected_payoff(Belief{0.5, 0.0, 0.5}, c.payoffs), 0.0, 1e-15);
  EXPECT_EQ(c.chain.invariant(), Belief::vertex(3, 1));
  EXPECT_NEAR(c.p1[0], 2 * eps, 1e-15);
  EXPECT_THROW(counterexample_instance(0.3, 0.5, 0.5), Error);
  EXPECT_THROW(counterexample_instance(0.01, 0.0, 0.5), Error);
  EXPECT_THROW(counterexample_instance(0.01, 0.5, 1.0), Error);
}

TEST(Experiments, CounterexamplePasses) {
  const ExperimentReport rep = run_experiment(counterexample_instance(0.01, 0.5, 0.5));
  EXPECT_TRUE(rep.all_pass()) << rep.text();
  EXPECT_LE(rep.get("gamma_p1"), 0.04 + 1e-4);
  EXPECT_GE(rep.get("V_p1"), 0.12626262626262627 - 0.01);
  EXPECT_NEAR(rep.get("alternative_investment_probability"), 1.0 / (2 * 0.99), 1e-12);
}

TEST(Experiments, PerturbedCounterexamplePersists) {
  InstanceConfig c = counterexample_instance(0.01, 0.5, 0.5);
  const double eta = 0.002;
  c.chain = renewal_chain(Belief::normalized({eta, 1 - 2 * eta, eta}), 0.5);
  const ExperimentReport rep = run_experiment(c);
  EXPECT_GT(rep.get("V_minus_gamma"), 0.05) << rep.text();
}

TEST(Experiments, Theorem1OnSmallGrid) {
  InstanceConfig c = parse_config_text(kTwoState);
  const ExperimentReport rep = run_experiment(c);
  EXPECT_TRUE(rep.all_pass()) << rep.text();
  EXPECT_LE(rep.get("max_abs_V_minus_gamma"), 5e-3);
  ASSERT_EQ(rep.tables.size(), 1u);
  EXPECT_EQ(rep.tables[0].rows.size(), 201u);
}

TEST(Experiments, NotApplicableVerdicts) {
  InstanceConfig c = parse_config_text(kTwoState);
  c.experiment = "theorem2";
  const ExperimentReport rep = run_experiment(c);
  ASSERT_EQ(rep.verdicts.size(), 1u);
  EXPECT_EQ(rep.verdicts[0].status, Status::not_applicable);
  EXPECT_FALSE(rep.all_pass());
  c.experiment = "theorem4";
  EXPECT_EQ(run_experiment(c).verdicts[0].status, Status::not_applicable);
}

TEST(Experiments, Theorem2AndBreakpoints) {
  const InstanceConfig c = parse_config_text(
      R"({"r": [2, -1, -4], "chain": {"kind": "renewal", "m": [0.3, 0.35, 0.35], "lambda": 0.8},
          "delta": 0.7, "seed": 3, "experiment": "theorem2"})");
  const ExperimentReport t2 = run_experiment(c);
  EXPECT_TRUE(t2.all_pass()) << t2.text();
  InstanceConfig b = c;
  b.experiment = "breakpoints";
  const ExperimentReport bp = run_experiment(b);
  EXPECT_TRUE(bp.all_pass()) << bp.text();
  EXPECT_GE(bp.get("K"), 2.0);
}

TEST(Experiments, OutputsAreReproducible) {
  InstanceConfig c = parse_config_text(
      R"({"r": [2, -1, -4], "chain": {"kind": "renewal", "m": [0.2, 0.7, 0.1], "lambda": 0.6},
          "delta": 0.7, "p1": [0.05, 0.05, 0.9], "grid": {"h": 0.05}, "seed": 9, "experiment": "theorem3",
          "params": {"trajectories": 200}})");
  const auto base = std::filesystem::temp_directory_path() / "persuade_repro_test";
  std::filesystem::remove_all(base);
  run_experiment(c).write(base / "a");
  run_experiment(c).write(base / "b");
  for (const char* f : {"theorem3_trajectories.csv"}) {
    const std::string a = slurp(base / "a" / f), b = slurp(base / "b" / f);
    EXPECT_FALSE(a.empty());
    EXPECT_EQ(a, b);
  }
  std::filesystem::remove_all(base);
}

TEST(Report, CsvUsesSeventeenDigits) {
  EXPECT_EQ(format_real(0.1), "0.10000000000000001");
  Table t;
  t.name = "x";
  t.header = {"a", "b"};
  t.add({"1", format_real(1.0 / 3.0)});
  EXPECT_EQ(t.csv(), "a,b\n1,0.33333333333333331\n");
}
