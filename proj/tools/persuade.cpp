// persuade: experiment runner for the dynamic information provision solver.
//
//   persuade run <config> [--out-dir DIR]
//   persuade counterexample --eps E --delta D --lambda L [--grid-h H] [--out-dir DIR]
//   persuade solve <config> --out <table>
//   persuade greedy-split --r 2,-1,-4 --p 0.5,0.3,0.2
//
// Exit status: 0 when every verdict passes, 1 otherwise, 2 on usage or
// configuration errors. PERSUADE_WORKERS sets the number of worker threads.

#include <filesystem>
#include <fstream>
#include <iostream>
#include <string>
#include <vector>

#include "CLI11.hpp"
#include "persuade/persuade.hpp"

namespace {

constexpr int kExitPass = 0;
constexpr int kExitFail = 1;
constexpr int kExitUsage = 2;

std::string format_belief(const persuade::Belief& p) {
  std::string out = "(";
  for (std::size_t i = 0; i < p.size(); ++i) {
    if (i) out += ", ";
    out += persuade::format_real(p[i]);
  }
  return out + ")";
}

int report_and_exit(const persuade::ExperimentReport& rep, const std::string& out_dir) {
  std::cout << rep.text();
  rep.write(out_dir);
  std::cout << "outputs written to " << out_dir << "\n";
  return rep.all_pass() ? kExitPass : kExitFail;
}

int cmd_run(const std::string& config, const std::string& out_dir) {
  return report_and_exit(persuade::run_experiment(persuade::load_config(config)), out_dir);
}

int cmd_counterexample(double eps, double delta, double lambda, double h, const std::string& out_dir) {
  persuade::InstanceConfig c;
  try {
    c = persuade::counterexample_instance(eps, delta, lambda, h);
  } catch (const persuade::Error& e) {
    persuade::fail(persuade::ErrorCode::config, e.what());
  }
  return report_and_exit(persuade::run_experiment(c), out_dir);
}

int cmd_solve(const std::string& config, const std::string& out) {
  using namespace persuade;
  const InstanceConfig c = load_config(config);
  if (c.size() != 2 && c.size() != 3) fail(ErrorCode::config, "solve supports two or three states");
  const SimplexGrid grid = SimplexGrid::with_spacing(c.size(), c.spacing());
  const SolveResult sol = solve(c.delta, c.chain, c.payoffs, grid, c.solve_eps());
  Table t;
  for (std::size_t k = 0; k < c.size(); ++k) t.header.push_back("p" + std::to_string(k + 1));
  t.header.push_back("V");
  for (std::size_t k = 0; k < grid.size(); ++k) {
    std::vector<std::string> row;
    for (double x : grid.node(k)) row.push_back(format_real(x));
    row.push_back(format_real(sol.field.values[k]));
    t.add(std::move(row));
  }
  std::ofstream f(out, std::ios::binary);
  if (!f) fail(ErrorCode::config, "cannot write '" + out + "'");
  f << t.csv();
  std::cout << "nodes: " << grid.size() << "\niterations: " << sol.iterations
            << "\nlast change: " << format_real(sol.last_change) << "\nV(p1): " << format_real(interpolate(sol.field, c.p1))
            << "\ntable: " << out << "\n";
  return kExitPass;
}

int cmd_greedy_split(const std::vector<double>& r, const std::vector<double>& p) {
  using namespace persuade;
  if (r.size() != p.size()) fail(ErrorCode::config, "--r and --p must have the same length");
  PayoffStructure pr;
  Belief b;
  try {
    pr = PayoffStructure(r);
    b = Belief(p);
  } catch (const Error& e) {
    fail(ErrorCode::config, e.what());
  }
  const GreedySplit g = greedy_split(b, pr);
  std::cout << "a_I: " << format_real(g.a_I) << "\n";
  std::cout << "q_I: " << (g.q_I ? format_belief(*g.q_I) : std::string("indeterminate")) << "\n";
  std::cout << "a_J: " << format_real(g.a_J) << "\n";
  std::cout << "q_J: " << (g.q_J ? format_belief(*g.q_J) : std::string("none")) << "\n";
  std::cout << "k*: " << (g.k_star == kInvestCell ? std::string("invest") : std::to_string(g.k_star)) << "\n";
  return kExitPass;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Greedy and optimal dynamic information provision"};
  app.require_subcommand(1);
  app.set_version_flag("--version", persuade::kVersion);

  std::string config, out_dir = "persuade_out", out;
  double eps = 0.0, delta = 0.0, lambda = 0.0, h = 1.0 / 150.0;
  std::vector<double> r, p;

  auto* run = app.add_subcommand("run", "Run the experiment named in a configuration file");
  run->add_option("config", config, "JSON configuration")->required();
  run->add_option("--out-dir", out_dir, "Directory for the report and tables");

  auto* ce = app.add_subcommand("counterexample", "Greedy versus optimal on the three-state counterexample");
  ce->add_option("--eps", eps, "Counterexample parameter in (0, 1/4)")->required();
  ce->add_option("--delta", delta, "Discount factor in (0,1)")->required();
  ce->add_option("--lambda", lambda, "Renewal ratio in [0,1)")->required();
  ce->add_option("--grid-h", h, "Grid spacing");
  ce->add_option("--out-dir", out_dir, "Directory for the report and tables");

  auto* sv = app.add_subcommand("solve", "Value iteration on the grid; writes node values");
  sv->add_option("config", config, "JSON configuration")->required();
  sv->add_option("--out", out, "Output CSV")->required();

  auto* gs = app.add_subcommand("greedy-split", "Closed-form greedy splitting of one belief");
  gs->add_option("--r", r, "Payoffs, comma separated")->required()->delimiter(',');
  gs->add_option("--p", p, "Belief, comma separated")->required()->delimiter(',');

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e);
    return code == 0 ? kExitPass : kExitUsage;
  }

  try {
    if (*run) return cmd_run(config, out_dir);
    if (*ce) return cmd_counterexample(eps, delta, lambda, h, out_dir);
    if (*sv) return cmd_solve(config, out);
    if (*gs) return cmd_greedy_split(r, p);
  } catch (const persuade::Error& e) {
    std::cerr << "error: " << e.what() << "\n";
    return e.code() == persuade::ErrorCode::config ? kExitUsage : kExitFail;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << "\n";
    return kExitFail;
  }
  return kExitUsage;
}
