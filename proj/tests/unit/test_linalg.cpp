#include <cmath>

#include <gtest/gtest.h>

#include "kmsperturb/errors.hpp"
#include "kmsperturb/linalg.hpp"
#include "oracles.hpp"

using namespace kmsperturb;
using namespace kmsperturb::linalg;

TEST(HermMatrix, RejectsNonHermitianWithMeasuredAsymmetry) {
  CMatrix a(2, 2);
  a << 1.0, 0.5, 0.25, 2.0;
  try {
    HermMatrix h(a);
    FAIL() << "expected NonHermitianError";
  } catch (const NonHermitianError& e) {
    EXPECT_DOUBLE_EQ(e.asymmetry(), 0.25);
  }
}

TEST(HermMatrix, SymmetrizesWithinTolerance) {
  CMatrix a(2, 2);
  a << 1.0, Complex(0.5, 1e-15), Complex(0.5, 0.0), 2.0;
  const HermMatrix h(a);
  EXPECT_EQ(hermitian_asymmetry(h.mat()), 0.0);
}

TEST(HermMatrix, RejectsNonSquareAndNonFinite) {
  EXPECT_THROW(HermMatrix(CMatrix::Zero(2, 3)), DimensionError);
  CMatrix a = CMatrix::Identity(2, 2);
  a(0, 0) = std::nan("");
  EXPECT_THROW(HermMatrix{a}, Error);
}

TEST(HermEig, IdentityHasUnitEigenvaluesAndUnitaryFrame) {
  const Spectrum s = herm_eig(HermMatrix::identity(3));
  for (Index i = 0; i < 3; ++i) EXPECT_NEAR(s.eigenvalues(i), 1.0, 1e-15);
  EXPECT_LT((s.frame.adjoint() * s.frame - CMatrix::Identity(3, 3)).norm(), 1e-14);
}

TEST(HermEig, DiagonalInputIsSortedAscending) {
  RVector d(3);
  d << 3.0, 1.0, 2.0;
  const Spectrum s = herm_eig(HermMatrix::diagonal(d));
  EXPECT_DOUBLE_EQ(s.eigenvalues(0), 1.0);
  EXPECT_DOUBLE_EQ(s.eigenvalues(1), 2.0);
  EXPECT_DOUBLE_EQ(s.eigenvalues(2), 3.0);
  EXPECT_DOUBLE_EQ(s.spread(), 2.0);
}

TEST(HermEig, RandomReconstruction) {
  const HermMatrix a = oracle::random_herm(4, 1.0, 7);
  const Spectrum s = herm_eig(a);
  const CMatrix back = apply_fun(s, RealFunction([](double x) { return x; }));
  EXPECT_LE(relative_frob_error(back, a.mat()), 1e-10);
}

TEST(ApplyFun, IdentityRoundTripProperty) {
  for (std::uint64_t seed = 1; seed <= 20; ++seed) {
    const Index d = 2 + static_cast<Index>(seed % 7);
    const HermMatrix a = oracle::random_herm(d, 0.5 + seed, seed);
    const CMatrix back = apply_fun(herm_eig(a), RealFunction([](double x) { return x; }));
    EXPECT_LE(relative_frob_error(back, a.mat()), 1e-10) << "seed " << seed;
  }
}

TEST(ApplyFun, ExpOfZeroIsIdentity) {
  const CMatrix e = apply_fun(herm_eig(HermMatrix::zero(1)), RealFunction([](double x) { return std::exp(x); }));
  EXPECT_EQ(e(0, 0), Complex(1.0));
}

TEST(ApplyFun, LogThenExpRoundTrip) {
  const HermMatrix h = oracle::random_herm(4, 1.0, 3);
  const HermMatrix pd(h.mat() + 2.0 * CMatrix::Identity(4, 4));
  const HermMatrix log_a(apply_fun(herm_eig(pd), RealFunction([](double x) { return std::log(x); })));
  const CMatrix back = apply_fun(herm_eig(log_a), RealFunction([](double x) { return std::exp(x); }));
  EXPECT_LE(relative_frob_error(back, pd.mat()), 1e-10);
}

TEST(ApplyFun, ComplexPowerOnDiagonal) {
  RVector d(1);
  d << std::exp(1.0);
  // lambda^i = e^{i log lambda}
  const CMatrix r = apply_fun(herm_eig(HermMatrix::diagonal(d)), ComplexFunction([](double x) {
                                return std::exp(Complex(0.0, 1.0) * std::log(x));
                              }));
  EXPECT_NEAR(std::abs(r(0, 0) - Complex(std::cos(1.0), std::sin(1.0))), 0.0, 1e-15);
}

TEST(ApplyFun, NonFiniteValueNamesTheEigenvalue) {
  RVector d(2);
  d << -1.0, 2.0;
  try {
    apply_fun(herm_eig(HermMatrix::diagonal(d)), RealFunction([](double x) { return std::log(x); }));
    FAIL() << "expected DomainError";
  } catch (const DomainError& e) {
    EXPECT_DOUBLE_EQ(e.eigenvalue(), -1.0);
  }
}

TEST(ApplyFun, ExpAgreesWithScalingAndSquaringProperty) {
  for (std::uint64_t seed = 1; seed <= 20; ++seed) {
    const HermMatrix a = oracle::random_herm(5, 0.1 * seed, seed);
    const CMatrix spectral = apply_fun(herm_eig(a), RealFunction([](double x) { return std::exp(x); }));
    EXPECT_LE(relative_frob_error(expm(a.mat()), spectral), 1e-10) << "seed " << seed;
  }
}

TEST(Expm, MatchesIndependentOracleOnNonNormalInput) {
  for (std::uint64_t seed = 1; seed <= 10; ++seed) {
    const CMatrix a = oracle::random_mat(4, seed) * (0.5 * static_cast<double>(seed));
    EXPECT_LE(oracle::rel_err(expm(a), oracle::expm(a)), 1e-12) << "seed " << seed;
  }
}

TEST(HsInner, TrivialValuesAndSymmetry) {
  EXPECT_EQ(hs_inner(CMatrix::Identity(2, 2), CMatrix::Identity(2, 2)), Complex(2.0));
  const CMatrix x = oracle::random_mat(3, 1);
  const CMatrix y = oracle::random_mat(3, 2);
  const Complex xx = hs_inner(x, x);
  EXPECT_GE(xx.real(), 0.0);
  EXPECT_EQ(xx.imag(), 0.0);
  EXPECT_NEAR(std::abs(hs_inner(x, y) - std::conj(hs_inner(y, x))), 0.0, 1e-13);
  // Conjugate-linear in the first slot.
  const Complex i(0.0, 1.0);
  EXPECT_NEAR(std::abs(hs_inner(i * x, y) + i * hs_inner(x, y)), 0.0, 1e-13);
  EXPECT_NEAR(std::abs(hs_inner(x, y) - (x.adjoint() * y).trace()), 0.0, 1e-13);
}

TEST(HsInner, CauchySchwarzOnHundredPairs) {
  kmsperturb::Rng rng(2024);
  for (int k = 0; k < 100; ++k) {
    const CMatrix x = random_matrix(4, rng);
    const CMatrix y = random_matrix(4, rng);
    EXPECT_LE(std::abs(hs_inner(x, y)), frob_norm(x) * frob_norm(y) * (1.0 + 1e-15));
  }
}

TEST(Norms, TrivialValues) {
  RVector d(2);
  d << -3.0, 2.0;
  EXPECT_NEAR(op_norm(HermMatrix::diagonal(d).mat()), 3.0, 1e-15);
  EXPECT_DOUBLE_EQ(frob_norm(CMatrix::Identity(4, 4)), 2.0);
}

TEST(Norms, SandwichInequality) {
  const CMatrix a = oracle::random_mat(5, 9);
  const double op = op_norm(a);
  const double fr = frob_norm(a);
  EXPECT_LE(op, fr * (1.0 + 1e-15));
  EXPECT_LE(fr, std::sqrt(5.0) * op * (1.0 + 1e-15));
}

TEST(ConjugateExp, MatchesExplicitProduct) {
  const HermMatrix m = oracle::random_herm(4, 1.5, 11);
  const CMatrix x = oracle::random_mat(4, 12);
  const Complex w(0.3, -0.8);
  const CMatrix expected = oracle::expm(w * m.mat()) * x * oracle::expm(-w * m.mat());
  EXPECT_LE(oracle::rel_err(conjugate_exp(herm_eig(m), w, x), expected), 1e-12);
}

TEST(ConjugateExp, OverflowCarriesExponent) {
  RVector d(2);
  d << 0.0, 1000.0;
  try {
    conjugate_exp(herm_eig(HermMatrix::diagonal(d)), 1.0, CMatrix::Identity(2, 2));
    FAIL() << "expected OverflowError";
  } catch (const OverflowError& e) {
    EXPECT_DOUBLE_EQ(e.exponent(), 1000.0);
  }
}

TEST(ExpShifted, MatchesOracle) {
  const HermMatrix m = oracle::random_herm(3, 2.0, 5);
  const CMatrix got = exp_shifted(herm_eig(m), Complex(0.5, 0.25), 1.0);
  const CMatrix want = oracle::expm(Complex(0.5, 0.25) * (m.mat() - CMatrix::Identity(3, 3)));
  EXPECT_LE(oracle::rel_err(got, want), 1e-12);
}

TEST(Helpers, DimensionMismatchAndFiniteness) {
  EXPECT_THROW(require_same_dim(CMatrix::Zero(2, 2), CMatrix::Zero(3, 3), "t"), DimensionError);
  CMatrix a = CMatrix::Zero(2, 2);
  a(1, 1) = std::numeric_limits<double>::infinity();
  EXPECT_THROW(require_finite(a, "t"), Error);
}
