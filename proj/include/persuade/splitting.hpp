#pragma once

// Bayes-plausible distributions over posteriors and the signal kernels that
// realize them.

#include <cmath>
#include <cstddef>
#include <string>
#include <utility>
#include <vector>

#include "persuade/error.hpp"
#include "persuade/model.hpp"

namespace persuade {

struct Atom {
  double weight = 0.0;
  Belief posterior;
};

/// A finitely supported distribution over posteriors whose mean is the prior.
/// Messages are the 0-based indices of the atoms.
class Splitting {
 public:
  const Belief& prior() const noexcept { return prior_; }
  const std::vector<Atom>& atoms() const noexcept { return atoms_; }
  std::size_t size() const noexcept { return atoms_.size(); }
  const Atom& operator[](std::size_t j) const { return atoms_[j]; }

  /// Sum of weight times posterior.
  Vector mean() const {
    Vector out(prior_.size(), 0.0);
    for (const Atom& a : atoms_)
      for (std::size_t i = 0; i < out.size(); ++i) out[i] += a.weight * a.posterior[i];
    return out;
  }

  /// Probability that the posterior lands in the investment region.
  double investment_probability(const PayoffStructure& r) const {
    double s = 0.0;
    for (const Atom& a : atoms_)
      if (invests(a.posterior, r)) s += a.weight;
    return s;
  }

 private:
  friend Splitting make_splitting(const Belief& prior, std::vector<Atom> atoms);
  Belief prior_;
  std::vector<Atom> atoms_;
};

inline Splitting make_splitting(const Belief& prior, std::vector<Atom> atoms) {
  require(!atoms.empty(), ErrorCode::invalid_weights, "splitting has no atoms");
  double total = 0.0;
  for (const Atom& a : atoms) {
    require(a.posterior.size() == prior.size(), ErrorCode::invalid_argument,
            "posterior dimension differs from the prior");
    require(std::isfinite(a.weight) && a.weight >= 0.0, ErrorCode::invalid_weights,
            "atom weight must be nonnegative");
    total += a.weight;
  }
  if (!(std::abs(total - 1.0) <= kSumTol))
    fail(ErrorCode::invalid_weights, "atom weights sum to " + std::to_string(total));
  std::erase_if(atoms, [](const Atom& a) { return a.weight == 0.0; });
  for (Atom& a : atoms) a.weight /= total;

  Splitting s;
  s.prior_ = prior;
  s.atoms_ = std::move(atoms);
  const Vector mean = s.mean();
  require(sup_distance(mean, prior.weights()) <= 1e-8, ErrorCode::not_bayes_plausible,
          "mean of the posteriors differs from the prior");
  return s;
}

/// The splitting that discloses nothing.
inline Splitting no_disclosure(const Belief& p) { return make_splitting(p, {{1.0, p}}); }

/// The splitting that reveals the state.
inline Splitting full_disclosure(const Belief& p) {
  std::vector<Atom> atoms;
  for (std::size_t i = 0; i < p.size(); ++i)
    if (p[i] > 0.0) atoms.push_back({p[i], Belief::vertex(p.size(), i)});
  return make_splitting(p, std::move(atoms));
}

/// P(message | state), indexed [state][message].
struct SignalKernel {
  Matrix message_probabilities;

  std::size_t states() const noexcept { return message_probabilities.size(); }
  std::size_t messages() const noexcept {
    return message_probabilities.empty() ? 0 : message_probabilities[0].size();
  }
};

inline SignalKernel signal_kernel(const Splitting& mu, const Belief& prior) {
  require(prior.size() == mu.prior().size(), ErrorCode::invalid_argument, "prior dimension mismatch");
  const std::size_t n = prior.size();
  const std::size_t k = mu.size();
  SignalKernel kernel{Matrix(n, Vector(k, 0.0))};
  for (std::size_t w = 0; w < n; ++w) {
    for (std::size_t j = 0; j < k; ++j) {
      kernel.message_probabilities[w][j] =
          prior[w] > 0.0 ? mu[j].weight * mu[j].posterior[w] / prior[w] : mu[j].weight;
    }
    // Absorb round-off so that rows stay stochastic.
    double s = 0.0;
    for (double x : kernel.message_probabilities[w]) s += x;
    for (double& x : kernel.message_probabilities[w]) x /= s;
  }
  return kernel;
}

inline double message_probability(const Belief& prior, const SignalKernel& kernel, std::size_t message) {
  require(kernel.states() == prior.size(), ErrorCode::invalid_argument, "kernel dimension mismatch");
  require(message < kernel.messages(), ErrorCode::invalid_argument, "message index out of range");
  double s = 0.0;
  for (std::size_t w = 0; w < prior.size(); ++w) s += prior[w] * kernel.message_probabilities[w][message];
  return s;
}

inline Belief bayes_posterior(const Belief& prior, const SignalKernel& kernel, std::size_t message) {
  const double total = message_probability(prior, kernel, message);
  require(total > 0.0, ErrorCode::undefined_posterior, "message has zero probability");
  Vector w(prior.size());
  for (std::size_t i = 0; i < w.size(); ++i) w[i] = prior[i] * kernel.message_probabilities[i][message] / total;
  return Belief::normalized(std::move(w));
}

}  // namespace persuade
