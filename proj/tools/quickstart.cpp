// Greedy split, greedy value and grid value for one three-state instance.

#include <cstdio>

#include "persuade/persuade.hpp"

int main() {
  using namespace persuade;
  const PayoffStructure r{2.0, -1.0, -4.0};
  const MarkovModel chain = renewal_chain(Belief{0.2, 0.5, 0.3}, 0.6);
  const Belief p{0.5, 0.3, 0.2};
  const double delta = 0.7;

  const GreedySplit g = greedy_split(p, r);
  std::printf("a_I = %.6f  k* = %zu\n", g.a_I, g.k_star);

  const auto req = PolicyValueRequest::make(p, delta, chain, r, 1e-8);
  std::printf("greedy value     = %.6f\n", greedy_value(req));
  std::printf("first-best bound = %.6f\n", first_best_bound(req));

  const SolveResult sol = solve(delta, chain, r, SimplexGrid(3, 60), 1e-5);
  std::printf("grid value       = %.6f  (%zu iterations)\n", interpolate(sol.field, p), sol.iterations);

  const Splitting mu = extract_splitting(p, sol.field, delta, chain, r);
  for (const Atom& a : mu.atoms())
    std::printf("  atom %.4f at (%.4f, %.4f, %.4f)\n", a.weight, a.posterior[0], a.posterior[1], a.posterior[2]);
}
