#include <cmath>
#include <numbers>

#include <boost/math/quadrature/exp_sinh.hpp>
#include <boost/math/quadrature/tanh_sinh.hpp>
#include <gtest/gtest.h>

#include "kmsperturb/errors.hpp"
#include "kmsperturb/kernel.hpp"

using namespace kmsperturb;
using namespace kmsperturb::kernel;

namespace {

constexpr double kPi = std::numbers::pi;

// Independent f for the oracle integrals: the defining closed form with no
// branch for small or large arguments.
double f_plain(double t) { return -2.0 * std::log(std::tanh(0.5 * kPi * std::abs(t))); }

}  // namespace

// Reference values from 40-digit arbitrary precision evaluation.
TEST(Kernel, FrozenValues) {
  EXPECT_NEAR(f_eval(0.5), 0.84381650951204843247, 1e-15);
  EXPECT_NEAR(f_eval(0.01), 8.3073394453342865185, 1e-14);
  EXPECT_NEAR(f_eval(3.0), 0.0003227980709819497565, 1e-18);
  EXPECT_NEAR(f_eval(-0.5), f_eval(0.5), 0.0);
  EXPECT_EQ(f_eval(0.0), 0.0);
  EXPECT_NEAR(F_eval(1.0), 0.4621171572600097585, 1e-16);
  EXPECT_NEAR(F_eval(-7.0), 0.1425968425158855299, 1e-16);
  EXPECT_EQ(F_eval(0.0), 0.5);
  EXPECT_NEAR(G_eval(2.0), 0.48089834696298780245, 1e-16);
  EXPECT_NEAR(G_eval(0.1), 0.35533184882993331353, 1e-16);
  EXPECT_EQ(G_eval(1.0), 0.5);
}

TEST(Kernel, FrozenTailMass) {
  EXPECT_NEAR(tail_mass(0.5).mass, 0.084661387028925311419, 1e-16);
  EXPECT_NEAR(tail_mass(1.0).mass, 0.017517577870044675264, 1e-17);
  EXPECT_NEAR(tail_mass(2.0).mass, 0.00075684632510868477887, 1e-18);
  EXPECT_NEAR(tail_mass(1.0).raw_mass, 2.0 * kPi * tail_mass(1.0).mass, 1e-17);
}

TEST(Kernel, TailMassMatchesBoostQuadrature) {
  boost::math::quadrature::exp_sinh<double> integrator;
  for (double t : {1.0, 2.0, 4.0}) {
    const double one_sided = integrator.integrate([](double s) { return f_plain(s); }, t,
                                                  std::numeric_limits<double>::infinity());
    const double want = 2.0 * one_sided / (2.0 * kPi);
    EXPECT_NEAR(tail_mass(t).mass / want, 1.0, 1e-10) << "T = " << t;
  }
}

TEST(Kernel, RawMassIsPi) {
  boost::math::quadrature::tanh_sinh<double> near;
  boost::math::quadrature::exp_sinh<double> far;
  const double inner = near.integrate([](double s) { return f_plain(s); }, 0.0, 1.0);
  const double outer = far.integrate([](double s) { return f_plain(s); }, 1.0,
                                     std::numeric_limits<double>::infinity());
  EXPECT_NEAR(2.0 * (inner + outer), kPi, 1e-10);
  // Same total through the library's own closed-form tail at a tiny cutoff.
  EXPECT_NEAR(tail_mass(1e-6).raw_mass, kPi, 1e-4);
}

TEST(Kernel, SeriesMatchesClosedForm) {
  for (double t : {0.05, 0.2, 0.7, 2.0}) {
    for (int n : {1, 5, 40}) {
      const double gap = std::abs(f_eval(t) - f_series(t, n));
      EXPECT_LE(gap, f_series_tail(t, n) * (1 + 1e-12) + 1e-15) << "t = " << t << " n = " << n;
    }
  }
  EXPECT_TRUE(std::isinf(f_series_tail(0.0, 3)));
}

TEST(Kernel, Symmetries) {
  for (double x : {0.1, 1.0, 5.0, 40.0}) {
    EXPECT_EQ(f_eval(x), f_eval(-x));
    EXPECT_EQ(F_eval(x), F_eval(-x));
    EXPECT_NEAR(G_eval(std::exp(x)), G_eval(std::exp(-x)), 1e-15);
  }
}

TEST(Kernel, GMatchesFOnExponentials) {
  for (int i = -300; i <= 300; ++i) {
    const double x = 0.1 * i;
    EXPECT_NEAR(G_eval(std::exp(x)), F_eval(x), 1e-14) << "x = " << x;
  }
}

TEST(Kernel, FSmallArgumentBranch) {
  for (double x : {1e-9, 1e-6, 5e-5, 2e-4}) {
    const double want = std::tanh(0.5 * x) / x;
    EXPECT_NEAR(F_eval(x), want, 1e-15);
  }
}

TEST(Kernel, GDomain) {
  EXPECT_THROW(G_eval(0.0), InvalidArgument);
  EXPECT_THROW(G_eval(-1.0), InvalidArgument);
  EXPECT_EQ(G_eval(std::numeric_limits<double>::infinity()), 0.0);
  EXPECT_NEAR(G_eval(1.0 + 1e-8), 0.5, 1e-12);
}

TEST(Kernel, TailMonotone) {
  double previous = tail_mass(0.1).mass;
  for (double t = 0.2; t <= 8.0; t *= 1.5) {
    const double m = tail_mass(t).mass;
    EXPECT_LT(m, previous);
    EXPECT_LT(tail_mass(2.0 * t).mass, m);
    previous = m;
  }
  EXPECT_THROW(tail_mass(0.0), InvalidArgument);
}

TEST(Kernel, CutoffForTail) {
  for (double target : {1e-3, 1e-6, 1e-10}) {
    const double t = cutoff_for_tail(target);
    EXPECT_LE(tail_mass(t).mass, target);
    EXPECT_GT(tail_mass(t * (1 - 1e-6)).mass, target * (1 - 1e-4));
  }
}

TEST(Kernel, FourierPairFrozen) {
  const auto spec = QuadratureSpec::for_tolerance(1e-9);
  EXPECT_NEAR(fourier_transform(1.0, spec).value.real(), 0.4621171572600097585, 1e-9);
  EXPECT_NEAR(fourier_transform(3.0, spec).value.real(), 0.30171608454828881275, 1e-9);
  EXPECT_NEAR(fourier_transform(10.0, spec).value.real(), 0.099990920426259513121, 1e-9);
  EXPECT_NEAR(fourier_transform(0.0, spec).value.real(), kKernelL1Norm, 1e-9);
}

TEST(Kernel, FourierResidualSplitScheme) {
  const auto spec = QuadratureSpec::for_tolerance(1e-9);
  for (double x : {0.0, 1.0, 20.0}) EXPECT_LE(fourier_residual(x, spec), 1e-9) << "x = " << x;
}

TEST(Kernel, DoubleExponentialBudget) {
  const auto coarse =
      QuadratureSpec::for_tolerance(1e-9, 32, QuadratureScheme::double_exponential);
  EXPECT_THROW(fourier_transform(20.0, coarse), QuadratureBudgetError);
  const auto fine = QuadratureSpec::for_tolerance(1e-9, 64, QuadratureScheme::double_exponential);
  for (double x : {0.0, 1.0, 20.0}) EXPECT_LE(fourier_residual(x, fine), 1e-9) << "x = " << x;
}

TEST(Kernel, SpecValidation) {
  QuadratureSpec spec = QuadratureSpec::for_tolerance(1e-6);
  EXPECT_NO_THROW(spec.validate());
  spec.cutoff = 0.5;
  EXPECT_THROW(spec.validate(), InvalidArgument);
  spec = QuadratureSpec::for_tolerance(1e-6);
  spec.nodes_per_unit = 2;
  EXPECT_THROW(spec.validate(), InvalidArgument);
  EXPECT_THROW(QuadratureSpec::for_tolerance(0.0), InvalidArgument);
}

TEST(Kernel, RuleWeightsIntegrateTheMass) {
  const auto spec = QuadratureSpec::for_tolerance(1e-10);
  const auto rules = kernel_rules(spec);
  double mass = 0.0;
  for (double w : rules.fine.weights) mass += 2.0 * w;
  EXPECT_NEAR(mass + tail_mass(spec.cutoff).mass, kKernelL1Norm, 1e-10);
  for (double t : rules.fine.nodes) {
    EXPECT_GT(t, 0.0);
    EXPECT_LE(t, spec.cutoff);
  }
}
