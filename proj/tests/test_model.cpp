#include <gtest/gtest.h>

#include <random>

#include "persuade/experiments.hpp"
#include "persuade/model.hpp"

using namespace persuade;

namespace {

void expect_belief_near(const Belief& p, std::initializer_list<double> want, double tol = 1e-12) {
  ASSERT_EQ(p.size(), want.size());
  std::size_t i = 0;
  for (double w : want) EXPECT_NEAR(p[i++], w, tol);
}

template <typename Fn>
ErrorCode code_of(Fn&& fn) {
  try {
    fn();
  } catch (const Error& e) {
    return e.code();
  }
  ADD_FAILURE() << "expected an error";
  return ErrorCode::invalid_argument;
}

}  // namespace

TEST(Belief, RenormalizesAndClampsTinyNegatives) {
  const Belief p{0.5, 0.5 + 1e-13, -1e-13};
  EXPECT_EQ(p[2], 0.0);
  EXPECT_NEAR(p[0] + p[1] + p[2], 1.0, 1e-15);
}

TEST(Belief, RejectsNegativeEntriesAndBadSums) {
  EXPECT_EQ(code_of([] { Belief({1.1, -0.1}); }), ErrorCode::invalid_argument);
  EXPECT_EQ(code_of([] { Belief({0.5, 0.6}); }), ErrorCode::invalid_argument);
  EXPECT_EQ(code_of([] { Belief(Vector{}); }), ErrorCode::invalid_argument);
  expect_belief_near(Belief::normalized({1.0, 3.0}), {0.25, 0.75});
}

TEST(ExpectedPayoff, ExamplesAndClassifier) {
  const PayoffStructure r{2.0, -1.0, -4.0};
  EXPECT_DOUBLE_EQ(expected_payoff(Belief::vertex(3, 0), r), 2.0);
  EXPECT_EQ(classify(Belief::vertex(3, 0), r), Region::Invest);
  EXPECT_NEAR(expected_payoff(Belief{0.5, 0.3, 0.2}, r), -0.1, 1e-15);
  EXPECT_EQ(classify(Belief{0.5, 0.3, 0.2}, r), Region::NoInvest);
  const PayoffStructure r2{1.0, -1.0};
  EXPECT_EQ(expected_payoff(Belief{0.5, 0.5}, r2), 0.0);
  EXPECT_EQ(classify(Belief{0.5, 0.5}, r2), Region::Frontier);
  EXPECT_TRUE(invests(Belief{0.5, 0.5}, r2));
  EXPECT_EQ(code_of([&] { expected_payoff(Belief{0.5, 0.5}, r); }), ErrorCode::invalid_argument);
}

TEST(PayoffStructure, PartitionAndOrdering) {
  const PayoffStructure r{-1.0, 2.0, -4.0, 0.0, -1.0};
  EXPECT_EQ(r.positive_states(), (std::vector<std::size_t>{1, 3}));
  EXPECT_EQ(r.negative_order(), (std::vector<std::size_t>{0, 4, 2}));
  EXPECT_FALSE(r.distinct_negative_payoffs());
  EXPECT_TRUE(PayoffStructure({1.0, 2.0}).all_invest());
  EXPECT_TRUE(PayoffStructure({-1.0, -2.0}).none_invest());
}

TEST(Drift, Examples) {
  const auto chain = MarkovModel::from_matrix({{0.9, 0.1}, {0.3, 0.7}});
  expect_belief_near(drift(Belief{1.0, 0.0}, chain), {0.9, 0.1});
  expect_belief_near(drift(chain.invariant(), chain), {chain.invariant()[0], chain.invariant()[1]});
  const auto ren = MarkovModel::renewal(Belief{0.2, 0.5, 0.3}, 0.4);
  const Belief p{0.7, 0.1, 0.2};
  const Belief q = drift(p, ren);
  for (std::size_t i = 0; i < 3; ++i) EXPECT_NEAR(q[i] - ren.invariant()[i], 0.4 * (p[i] - ren.invariant()[i]), 1e-12);
}

TEST(Drift, MatrixProductMatchesHomothety) {
  // The renewal shortcut and the matrix product agree.
  const Belief m{0.1, 0.6, 0.3};
  const auto ren = MarkovModel::renewal(m, 0.7);
  const auto mat = MarkovModel::from_matrix(ren.transition());
  const Belief p{0.3, 0.3, 0.4};
  const Belief a = drift(p, ren), b = drift(p, mat);
  for (std::size_t i = 0; i < 3; ++i) EXPECT_NEAR(a[i], b[i], 1e-12);
}

TEST(DriftPreimage, Examples) {
  const auto ren = MarkovModel::renewal(Belief{0.5, 0.5}, 0.5);
  expect_belief_near(drift_preimage(Belief{0.5, 0.5}, ren), {0.5, 0.5});
  expect_belief_near(drift_preimage(Belief{0.6, 0.4}, ren), {0.7, 0.3});
  EXPECT_EQ(code_of([&] { drift_preimage(Belief{1.0, 0.0}, ren); }), ErrorCode::out_of_simplex);
  const auto iid = MarkovModel::renewal(Belief{0.5, 0.5}, 0.0);
  EXPECT_EQ(code_of([&] { drift_preimage(Belief{0.6, 0.4}, iid); }), ErrorCode::no_preimage);
}

TEST(RenewalChain, Examples) {
  const auto c = renewal_chain(Belief::uniform(3), 0.4);
  for (std::size_t i = 0; i < 3; ++i)
    for (std::size_t j = 0; j < 3; ++j) EXPECT_NEAR(c.transition()[i][j], i == j ? 0.6 : 0.2, 1e-15);
  const Belief m{0.2, 0.3, 0.5};
  const auto iid = renewal_chain(m, 0.0);
  for (const auto& row : iid.transition())
    for (std::size_t j = 0; j < 3; ++j) EXPECT_EQ(row[j], m[j]);
  const auto abs = renewal_chain(Belief::vertex(3, 1), 0.5);
  EXPECT_EQ(abs.transition()[1][1], 1.0);
  EXPECT_EQ(abs.transition()[0][0], 0.5);
  EXPECT_EQ(abs.transition()[0][1], 0.5);
  EXPECT_EQ(code_of([&] { renewal_chain(m, 1.0); }), ErrorCode::invalid_argument);
  EXPECT_EQ(code_of([&] { renewal_chain(m, -0.1); }), ErrorCode::invalid_argument);
}

TEST(InvariantMeasure, Examples) {
  const Belief m{0.25, 0.25, 0.5};
  const Belief got = invariant_measure(renewal_chain(m, 0.3).transition());
  for (std::size_t i = 0; i < 3; ++i) EXPECT_NEAR(got[i], m[i], 1e-12);
  const double a = 0.2, b = 0.05;  // P(+ -> -), P(- -> +)
  const Belief two = invariant_measure({{1 - a, a}, {b, 1 - b}});
  EXPECT_NEAR(two[0], b / (a + b), 1e-12);
  EXPECT_EQ(code_of([] { invariant_measure({{1.0, 0.0}, {0.0, 1.0}}); }), ErrorCode::ambiguous_invariant);
}

TEST(MarkovModel, ReducibleChainNeedsExplicitMeasure) {
  const Matrix t = renewal_chain(Belief::vertex(3, 1), 0.5).transition();
  const auto c = MarkovModel::from_matrix(t, Belief::vertex(3, 1));
  EXPECT_FALSE(c.is_irreducible());
  EXPECT_TRUE(renewal_chain(Belief::uniform(3), 0.5).is_irreducible());
  EXPECT_EQ(code_of([&] { MarkovModel::from_matrix(t, Belief::uniform(3)); }), ErrorCode::invalid_argument);
  EXPECT_EQ(code_of([] { MarkovModel::from_matrix({{0.5, 0.6}, {0.5, 0.5}}); }), ErrorCode::invalid_argument);
}

TEST(FrontierExtremes, Examples) {
  const auto two = frontier_extremes(PayoffStructure{1.0, -1.0});
  ASSERT_EQ(two.size(), 1u);
  expect_belief_near(two[0], {0.5, 0.5});
  const PayoffStructure r{2.0, -1.0, -4.0};
  const auto e = frontier_extremes(r);
  ASSERT_EQ(e.size(), 2u);
  expect_belief_near(e[0], {1.0 / 3.0, 2.0 / 3.0, 0.0});
  expect_belief_near(e[1], {2.0 / 3.0, 0.0, 1.0 / 3.0});
  const PayoffStructure r4{1.0, 3.0, -2.0, 0.5};
  EXPECT_EQ(frontier_extremes(r4).size(), r4.positive_states().size());
}

TEST(ModelProperties, RandomInstances) {
  Rng rng(2024);
  for (int t = 0; t < 200; ++t) {
    const std::size_t n = 2 + t % 4;
    const Belief m = random_belief(n, rng);
    const double lambda = uniform(rng, 0.0, 0.99);
    const auto chain = renewal_chain(m, lambda);
    const Belief p = random_belief(n, rng), q = random_belief(n, rng);
    const double a = uniform(rng);

    const Belief lhs = drift(Belief::mix(a, p, q), chain);
    const Belief dp = drift(p, chain), dq = drift(q, chain);
    for (std::size_t i = 0; i < n; ++i) EXPECT_NEAR(lhs[i], a * dp[i] + (1 - a) * dq[i], 1e-12);

    EXPECT_NEAR(l1_distance(dp.span(), m.span()), lambda * l1_distance(p.span(), m.span()), 1e-12);

    if (lambda > 0.0) {
      const Belief back = drift_preimage(dp, chain);
      for (std::size_t i = 0; i < n; ++i) EXPECT_NEAR(back[i], p[i], 1e-10);
    }

    const Belief inv = invariant_measure(chain.transition());
    for (std::size_t i = 0; i < n; ++i) EXPECT_NEAR(inv[i], m[i], 1e-10);

    Vector r(n);
    for (std::size_t i = 0; i < n; ++i) r[i] = i == 0 ? uniform(rng, 0.1, 2.0) : uniform(rng, -2.0, 2.0);
    if (r[n - 1] >= 0.0) r[n - 1] = -0.5;
    const PayoffStructure pr(r);
    for (const Belief& e : frontier_extremes(pr)) {
      EXPECT_NEAR(expected_payoff(e, pr), 0.0, 1e-12);
      std::size_t support = 0;
      for (double x : e) support += x > 0.0;
      EXPECT_LE(support, 2u);
    }
  }
}
