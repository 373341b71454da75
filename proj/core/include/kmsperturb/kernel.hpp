#pragma once

#include <complex>
#include <functional>
#include <vector>

// Scalar kernel layer.
//
//   f(t) = -2 log tanh(pi|t|/2) = sum_n 2/(n+1/2) e^{-2 pi (n+1/2)|t|},  f(0) = 0
//   F(x) = (e^x - 1)/((e^x + 1) x),  F(0) = 1/2
//   G(l) = (1+l)^{-1} int_0^1 l^u du = (l - 1)/((1 + l) log l),  G(1) = 1/2
//
// f integrates to pi and its Fourier transform is 2 pi F.  The normalized
// kernel k(t) = f(t)/(2 pi) satisfies int k = F(0) = 1/2 and
// int k(t) e^{ixt} dt = F(x); every integral against the kernel in this
// library (Fourier pair, tail mass, the quadrature route for Phi) uses k.

namespace kmsperturb::kernel {

inline constexpr double kKernelL1Norm = 0.5;

/// The raw kernel f.
double f_eval(double t);
/// Partial sum of the exponential series of f with `terms` terms.
double f_series(double t, int terms);
/// Upper bound on the series remainder after `terms` terms (t != 0).
double f_series_tail(double t, int terms);
/// k(t) = f(t) / (2 pi).
double kernel_density(double t);

double F_eval(double x);
/// Throws InvalidArgument for lambda <= 0.
double G_eval(double lambda);

/// Two-sided tail of the kernel beyond |t| > T.
struct KernelTailBound {
  double cutoff = 0.0;
  /// int_{|t|>T} k(t) dt bound (normalized kernel).
  double mass = 0.0;
  /// Same bound for the raw kernel f (= 2 pi * mass).
  double raw_mass = 0.0;
};

/// Closed-form series tail: raw one-sided tail is
/// sum_n e^{-2 pi (n+1/2) T} / (pi (n+1/2)^2).
KernelTailBound tail_mass(double cutoff);

/// Smallest cutoff (to 1e-12 relative, by bisection) with tail_mass(T).mass <= target.
double cutoff_for_tail(double target);

enum class QuadratureScheme { split_singular, double_exponential };

struct QuadratureSpec {
  double cutoff = 0.0;
  int nodes_per_unit = 32;
  double tolerance = 1e-9;
  QuadratureScheme scheme = QuadratureScheme::split_singular;

  /// Cutoff chosen so the analytic tail is at most tolerance / 2.
  static QuadratureSpec for_tolerance(double tolerance, int nodes_per_unit = 32,
                                      QuadratureScheme scheme = QuadratureScheme::split_singular);
  /// Throws InvalidArgument when the invariants fail.
  void validate() const;
};

/// Nodes t_k in (0, T] with weights that already include k(t_k):
/// int_R k(t) g(t) dt ~ sum_k w_k (g(t_k) + g(-t_k)).
struct KernelRule {
  std::vector<double> nodes;
  std::vector<double> weights;
};

/// The rule described by `spec` and a coarser companion used for error estimates.
struct KernelRulePair {
  KernelRule fine;
  KernelRule coarse;
};
KernelRulePair kernel_rules(const QuadratureSpec& spec);

struct QuadratureResult {
  std::complex<double> value;
  double error_estimate = 0.0;
};

/// int k(t) e^{ixt} dt.  Throws QuadratureBudgetError when the error
/// estimate exceeds spec.tolerance.
QuadratureResult fourier_transform(double x, const QuadratureSpec& spec);

/// |int k(t) e^{ixt} dt - F(x)|.
double fourier_residual(double x, const QuadratureSpec& spec);

}  // namespace kmsperturb::kernel
