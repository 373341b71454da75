#include "kmsperturb/kernel.hpp"

#include <algorithm>
#include <cmath>
#include <numbers>
#include <sstream>

#include "kmsperturb/errors.hpp"
#include "kmsperturb/gauss_legendre.hpp"

namespace kmsperturb::kernel {

namespace {

constexpr double kPi = std::numbers::pi;

// Panel edges in v for the substitution t = t0 * e^{-v}; the integrand
// decays like v e^{-v}, so panels widen once it is small.
constexpr double kLogPanelEdges[] = {0, 1, 2, 3, 4, 5, 6, 7, 8, 10, 13, 17, 22, 28, 36, 46};

void append_split_rule(const QuadratureSpec& spec, int n, KernelRule& rule) {
  const GaussLegendre base = gauss_legendre(n);
  const double t0 = std::min(1.0, spec.cutoff);
  const std::size_t edges = std::size(kLogPanelEdges);
  for (std::size_t p = 0; p + 1 < edges; ++p) {
    const double a = kLogPanelEdges[p];
    const double b = kLogPanelEdges[p + 1];
    for (int i = 0; i < n; ++i) {
      const double v = 0.5 * (a + b) + 0.5 * (b - a) * base.nodes[i];
      const double t = t0 * std::exp(-v);
      const double jac = t;  // dt = -t dv
      rule.nodes.push_back(t);
      rule.weights.push_back(0.5 * (b - a) * base.weights[i] * jac * kernel_density(t));
    }
  }
  if (spec.cutoff > t0) {
    const int panels = std::max(1, static_cast<int>(std::ceil(spec.cutoff - t0 - 1e-12)));
    const GaussLegendre outer = composite_gauss_legendre(t0, spec.cutoff, panels, n);
    for (std::size_t i = 0; i < outer.nodes.size(); ++i) {
      rule.nodes.push_back(outer.nodes[i]);
      rule.weights.push_back(outer.weights[i] * kernel_density(outer.nodes[i]));
    }
  }
}

/// tanh-sinh on [0, T]: t = T / (1 + e^{-2a}), a = (pi/2) sinh(kh).
void append_de_rule(const QuadratureSpec& spec, double h, KernelRule& rule) {
  const double window = 4.5;
  const long kmax = static_cast<long>(std::floor(window / h));
  for (long k = -kmax; k <= kmax; ++k) {
    const double s = k * h;
    const double a = 0.5 * kPi * std::sinh(s);
    const double t = spec.cutoff / (1.0 + std::exp(-2.0 * a));
    if (!(t > 0.0)) continue;
    const double ch = std::cosh(a);
    const double w = h * 0.5 * kPi * std::cosh(s) * spec.cutoff / (2.0 * ch * ch);
    if (!(w > 0.0) || !std::isfinite(w)) continue;
    rule.nodes.push_back(t);
    rule.weights.push_back(w * kernel_density(t));
  }
}

}  // namespace

double f_eval(double t) {
  if (t == 0.0) return 0.0;
  const double y = 0.5 * kPi * std::abs(t);
  if (y < 0.5) return -2.0 * std::log(std::tanh(y));
  // log tanh y = log1p(-2 / (e^{2y} + 1)); exact zero once e^{2y} overflows.
  return -2.0 * std::log1p(-2.0 / (std::exp(2.0 * y) + 1.0));
}

double f_series(double t, int terms) {
  const double at = std::abs(t);
  double acc = 0.0;
  for (int n = 0; n < terms; ++n) {
    const double m = n + 0.5;
    acc += 2.0 / m * std::exp(-2.0 * kPi * m * at);
  }
  return acc;
}

double f_series_tail(double t, int terms) {
  const double at = std::abs(t);
  if (at == 0.0) return std::numeric_limits<double>::infinity();
  const double m = terms + 0.5;
  return 2.0 / m * std::exp(-2.0 * kPi * m * at) / (-std::expm1(-2.0 * kPi * at));
}

double kernel_density(double t) { return f_eval(t) / (2.0 * kPi); }

double F_eval(double x) {
  if (x == 0.0) return 0.5;
  if (std::abs(x) < 1e-4) {
    const double x2 = x * x;
    return 0.5 - x2 / 24.0 + x2 * x2 / 240.0;
  }
  return std::tanh(0.5 * x) / x;
}

double G_eval(double lambda) {
  if (!(lambda > 0.0)) {
    std::ostringstream os;
    os << "G_eval: lambda must be > 0, got " << lambda;
    throw InvalidArgument(os.str());
  }
  if (std::isinf(lambda)) return 0.0;
  const double d = lambda - 1.0;
  if (d == 0.0) return 0.5;
  double ratio;  // (lambda - 1) / log(lambda)
  if (std::abs(d) < 1e-6)
    ratio = 1.0 + d / 2.0 - d * d / 12.0;
  else if (std::abs(d) < 0.5)
    ratio = d / std::log1p(d);
  else
    ratio = d / std::log(lambda);
  return ratio / (1.0 + lambda);
}

KernelTailBound tail_mass(double cutoff) {
  if (!(cutoff > 0.0)) throw InvalidArgument("tail_mass: cutoff must be > 0");
  double one_sided = 0.0;
  for (long n = 0; n < 100000000L; ++n) {
    const double m = n + 0.5;
    const double term = std::exp(-2.0 * kPi * m * cutoff) / (kPi * m * m);
    one_sided += term;
    if (term <= 1e-18 * one_sided) break;
  }
  KernelTailBound b;
  b.cutoff = cutoff;
  b.raw_mass = 2.0 * one_sided;
  b.mass = b.raw_mass / (2.0 * kPi);
  return b;
}

double cutoff_for_tail(double target) {
  if (!(target > 0.0)) throw InvalidArgument("cutoff_for_tail: target must be > 0");
  if (target >= kKernelL1Norm) return 1e-3;
  double lo = 1e-3, hi = 1.0;
  while (tail_mass(hi).mass > target) {
    lo = hi;
    hi *= 2.0;
  }
  while (hi - lo > 1e-12 * hi) {
    const double mid = 0.5 * (lo + hi);
    (tail_mass(mid).mass > target ? lo : hi) = mid;
  }
  return hi;
}

QuadratureSpec QuadratureSpec::for_tolerance(double tolerance, int nodes_per_unit,
                                             QuadratureScheme scheme) {
  QuadratureSpec spec;
  spec.tolerance = tolerance;
  spec.nodes_per_unit = nodes_per_unit;
  spec.scheme = scheme;
  if (!(tolerance > 0.0)) throw InvalidArgument("QuadratureSpec: tolerance must be > 0");
  spec.cutoff = std::max(1.0, cutoff_for_tail(0.5 * tolerance));
  return spec;
}

void QuadratureSpec::validate() const {
  if (!(tolerance > 0.0)) throw InvalidArgument("QuadratureSpec: tolerance must be > 0");
  if (!(cutoff > 0.0)) throw InvalidArgument("QuadratureSpec: cutoff must be > 0");
  if (nodes_per_unit < 4) throw InvalidArgument("QuadratureSpec: nodes_per_unit must be >= 4");
  const double tail = tail_mass(cutoff).mass;
  if (tail > 0.5 * tolerance * (1.0 + 1e-9)) {
    std::ostringstream os;
    os << "QuadratureSpec: tail mass " << tail << " beyond cutoff " << cutoff
       << " exceeds tolerance/2 = " << 0.5 * tolerance;
    throw InvalidArgument(os.str());
  }
}

KernelRulePair kernel_rules(const QuadratureSpec& spec) {
  spec.validate();
  KernelRulePair rules;
  if (spec.scheme == QuadratureScheme::split_singular) {
    append_split_rule(spec, spec.nodes_per_unit, rules.fine);
    append_split_rule(spec, std::max(2, (3 * spec.nodes_per_unit) / 4), rules.coarse);
  } else {
    const double h = 1.0 / spec.nodes_per_unit;
    append_de_rule(spec, h, rules.fine);
    append_de_rule(spec, 2.0 * h, rules.coarse);
  }
  return rules;
}

QuadratureResult fourier_transform(double x, const QuadratureSpec& spec) {
  const KernelRulePair rules = kernel_rules(spec);
  auto integrate = [x](const KernelRule& r) {
    double acc = 0.0;
    for (std::size_t k = 0; k < r.nodes.size(); ++k)
      acc += r.weights[k] * 2.0 * std::cos(x * r.nodes[k]);
    return acc;
  };
  const double fine = integrate(rules.fine);
  const double coarse = integrate(rules.coarse);
  QuadratureResult out{fine, std::abs(fine - coarse)};
  if (out.error_estimate > spec.tolerance) {
    std::ostringstream os;
    os << "fourier_transform: error estimate " << out.error_estimate << " at x = " << x
       << " exceeds tolerance " << spec.tolerance << " with " << spec.nodes_per_unit
       << " nodes per unit";
    throw QuadratureBudgetError(os.str(), out.error_estimate);
  }
  return out;
}

double fourier_residual(double x, const QuadratureSpec& spec) {
  return std::abs(fourier_transform(x, spec).value - F_eval(x));
}

}  // namespace kmsperturb::kernel
