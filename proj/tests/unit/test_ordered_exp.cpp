#include <cmath>

#include <gtest/gtest.h>

#include "kmsperturb/errors.hpp"
#include "kmsperturb/ordered_exp.hpp"
#include "oracles.hpp"

using namespace kmsperturb;
using namespace kmsperturb::ordered_exp;

TEST(SolveFlow, ConstantGeneratorGivesExponential) {
  const CMatrix g = oracle::random_mat(3, 1) * 0.5;
  for (Side side : {Side::left, Side::right}) {
    const auto r = solve_flow([&](double) { return g; }, 3, 1.3, side, {});
    EXPECT_LE(oracle::rel_err(r.value, oracle::expm(1.3 * g)), 1e-10);
  }
}

TEST(SolveFlow, OrderingOfNonCommutingGenerator) {
  // Piecewise-smooth rotation generators: compare against a fine product of
  // short-time exponentials, ordered later-times-left for Side::left.
  const CMatrix a = oracle::random_mat(2, 2);
  const CMatrix b = oracle::random_mat(2, 3);
  const auto g = [&](double r) -> CMatrix { return a * std::cos(r) + b * std::sin(2.0 * r); };
  const int n = 4000;
  const double h = 1.0 / n;
  CMatrix left = CMatrix::Identity(2, 2), right = CMatrix::Identity(2, 2);
  for (int k = 0; k < n; ++k) {
    // midpoint exponential product, second order in h
    const CMatrix step = oracle::expm(h * g((k + 0.5) * h));
    left = step * left;
    right = right * step;
  }
  const auto l = solve_flow(g, 2, 1.0, Side::left, {1e-12, 0.125, 16});
  const auto r = solve_flow(g, 2, 1.0, Side::right, {1e-12, 0.125, 16});
  EXPECT_LE(oracle::rel_err(l.value, left), 1e-6);
  EXPECT_LE(oracle::rel_err(r.value, right), 1e-6);
  EXPECT_GT(oracle::rel_err(l.value, r.value), 1e-3);
}

TEST(DysonTerms, SumMatchesFlowAndTermsScaleFactorially) {
  const CMatrix g = oracle::random_mat(3, 4);
  const auto gen = [&](double r) -> CMatrix { return g * (1.0 + r); };
  const auto flow = solve_flow(gen, 3, 1.0, Side::left, {});
  const auto dyson = dyson_terms(gen, 3, 1.0, 25, Side::left, {});
  ASSERT_EQ(dyson.terms.size(), 26u);
  EXPECT_LE(oracle::rel_err(dyson.sum(), flow.value), 1e-9);
  // Commuting generator: the n-th term is (int g)^n / n!.
  const CMatrix integral = 1.5 * g;
  CMatrix power = CMatrix::Identity(3, 3);
  double fact = 1.0;
  for (int n = 0; n <= 6; ++n) {
    EXPECT_LE(oracle::rel_err(dyson.terms[n], power / fact), 1e-9) << "n = " << n;
    power = power * integral;
    fact *= n + 1;
  }
}

TEST(DysonTerms, OrderZeroIsIdentity) {
  const auto d = dyson_terms([](double) { return CMatrix::Identity(2, 2); }, 2, 1.0, 0, Side::left, {});
  ASSERT_EQ(d.terms.size(), 1u);
  EXPECT_EQ(d.sum(), CMatrix::Identity(2, 2));
}

TEST(SolveFlow, HalvingFailureThrowsWithDistance) {
  const auto g = [](double r) -> CMatrix {
    return CMatrix::Identity(1, 1) * std::sin(1e6 * r) * 1e3;
  };
  try {
    solve_flow(g, 1, 1.0, Side::left, {1e-14, 0.5, 2});
    FAIL() << "expected IntegratorError";
  } catch (const IntegratorError& e) {
    EXPECT_GT(e.last_distance(), 1e-14);
  }
}

TEST(ExpTail, MatchesDirectRemainder) {
  EXPECT_NEAR(exp_tail(1.0, 0), std::exp(1.0) - 1.0, 1e-15);
  EXPECT_NEAR(exp_tail(2.0, 3), std::exp(2.0) - 1.0 - 2.0 - 2.0 - 8.0 / 6.0, 1e-14);
  EXPECT_EQ(exp_tail(0.0, 5), 0.0);
  EXPECT_LT(exp_tail(1.0, 20), 1e-19);
}
