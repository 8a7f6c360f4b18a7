#include <gtest/gtest.h>

#include "persuade/experiments.hpp"
#include "persuade/splitting.hpp"

using namespace persuade;

namespace {

ErrorCode error_code(const std::function<void()>& fn) {
  try {
    fn();
  } catch (const Error& e) {
    return e.code();
  }
  ADD_FAILURE() << "expected an error";
  return ErrorCode::invalid_argument;
}

}  // namespace

TEST(MakeSplitting, NoDisclosure) {
  const Belief p{0.2, 0.3, 0.5};
  const Splitting mu = no_disclosure(p);
  ASSERT_EQ(mu.size(), 1u);
  EXPECT_EQ(mu[0].weight, 1.0);
  EXPECT_EQ(mu[0].posterior, p);
}

TEST(MakeSplitting, ValidAndInvalidExamples) {
  const Belief prior{0.25, 0.75};
  const Splitting ok = make_splitting(prior, {{0.5, Belief{0.5, 0.5}}, {0.5, Belief{0.0, 1.0}}});
  EXPECT_EQ(ok.size(), 2u);
  EXPECT_EQ(error_code([&] { make_splitting(prior, {{0.5, Belief{0.6, 0.4}}, {0.5, Belief{0.0, 1.0}}}); }),
            ErrorCode::not_bayes_plausible);
  EXPECT_EQ(error_code([&] { make_splitting(prior, {{0.7, Belief{0.5, 0.5}}, {0.5, Belief{0.0, 1.0}}}); }),
            ErrorCode::invalid_weights);
  EXPECT_EQ(error_code([&] { make_splitting(prior, {{-0.5, Belief{0.5, 0.5}}, {1.5, Belief{0.0, 1.0}}}); }),
            ErrorCode::invalid_weights);
  EXPECT_EQ(error_code([&] { make_splitting(prior, {}); }), ErrorCode::invalid_weights);
}

TEST(MakeSplitting, DropsZeroWeightAtoms) {
  const Belief prior{0.25, 0.75};
  const Splitting mu = make_splitting(prior, {{1.0, prior}, {0.0, Belief{1.0, 0.0}}});
  EXPECT_EQ(mu.size(), 1u);
}

TEST(SignalKernel, Examples) {
  const Belief p{0.2, 0.3, 0.5};
  const SignalKernel k0 = signal_kernel(no_disclosure(p), p);
  for (const auto& row : k0.message_probabilities) {
    ASSERT_EQ(row.size(), 1u);
    EXPECT_EQ(row[0], 1.0);
  }
  const Belief prior{0.25, 0.75};
  const Splitting mu = make_splitting(prior, {{0.5, Belief{0.5, 0.5}}, {0.5, Belief{0.0, 1.0}}});
  const SignalKernel k = signal_kernel(mu, prior);
  EXPECT_NEAR(k.message_probabilities[0][0], 1.0, 1e-15);
  EXPECT_NEAR(k.message_probabilities[1][0], 1.0 / 3.0, 1e-15);
  EXPECT_NEAR(k.message_probabilities[1][1], 2.0 / 3.0, 1e-15);
}

TEST(BayesPosterior, UninformativeAndRevealing) {
  const Belief p{0.2, 0.3, 0.5};
  const SignalKernel flat{{{0.4, 0.6}, {0.4, 0.6}, {0.4, 0.6}}};
  for (std::size_t j = 0; j < 2; ++j) {
    const Belief q = bayes_posterior(p, flat, j);
    for (std::size_t i = 0; i < 3; ++i) EXPECT_NEAR(q[i], p[i], 1e-15);
  }
  const SignalKernel reveal{{{1, 0, 0}, {0, 1, 0}, {0, 0, 1}}};
  for (std::size_t j = 0; j < 3; ++j) EXPECT_EQ(bayes_posterior(p, reveal, j), Belief::vertex(3, j));
  const SignalKernel dead{{{1, 0}, {1, 0}, {1, 0}}};
  EXPECT_EQ(error_code([&] { bayes_posterior(p, dead, 1); }), ErrorCode::undefined_posterior);
}

TEST(BayesPosterior, AlternativeSplittingOfTheCounterexample) {
  const double eps = 0.01;
  const Belief p2 = Belief::normalized({eps, 0.5, 0.5 - eps});
  const Splitting mu = make_splitting(p2, {{0.5 / (1.0 - eps), Belief::normalized({eps, 1.0 - eps, 0.0})},
                                           {1.0 - 0.5 / (1.0 - eps), Belief::normalized({eps, 0.0, 1.0 - eps})}});
  const SignalKernel k = signal_kernel(mu, p2);
  EXPECT_NEAR(message_probability(p2, k, 0), 1.0 / (2.0 * (1.0 - eps)), 1e-14);
}

TEST(SplittingRoundTrip, RandomSplittings) {
  Rng rng(7);
  for (int t = 0; t < 500; ++t) {
    const std::size_t n = 2 + t % 4;
    const std::size_t atoms = 1 + t % 5;
    std::vector<Atom> a;
    Vector prior(n, 0.0);
    double total = 0.0;
    for (std::size_t j = 0; j < atoms; ++j) {
      const double w = uniform(rng, 0.05, 1.0);
      a.push_back({w, random_belief(n, rng)});
      total += w;
    }
    for (Atom& x : a) {
      x.weight /= total;
      for (std::size_t i = 0; i < n; ++i) prior[i] += x.weight * x.posterior[i];
    }
    const Belief p = Belief::normalized(prior);
    const Splitting mu = make_splitting(p, a);
    const Vector mean = mu.mean();
    for (std::size_t i = 0; i < n; ++i) EXPECT_NEAR(mean[i], p[i], 1e-10);
    const SignalKernel k = signal_kernel(mu, p);
    for (std::size_t j = 0; j < mu.size(); ++j) {
      EXPECT_NEAR(message_probability(p, k, j), mu[j].weight, 1e-10);
      const Belief q = bayes_posterior(p, k, j);
      for (std::size_t i = 0; i < n; ++i) EXPECT_NEAR(q[i], mu[j].posterior[i], 1e-10);
    }
  }
}

TEST(FullDisclosure, RevealsTheState) {
  const Belief p{0.2, 0.0, 0.8};
  const Splitting mu = full_disclosure(p);
  ASSERT_EQ(mu.size(), 2u);
  EXPECT_EQ(mu[0].posterior, Belief::vertex(3, 0));
  EXPECT_EQ(mu[1].posterior, Belief::vertex(3, 2));
  EXPECT_NEAR(mu.investment_probability(PayoffStructure{1.0, -1.0, -1.0}), 0.2, 1e-15);
}
