#include "kmsperturb/suite.hpp"

#include <algorithm>
#include <chrono>
#include <cmath>
#include <ctime>
#include <exception>
#include <limits>
#include <mutex>
#include <numbers>
#include <sstream>
#include <thread>

#include "json_util.hpp"
#include "kmsperturb/duhamel.hpp"
#include "kmsperturb/errors.hpp"
#include "kmsperturb/gauss_legendre.hpp"
#include "kmsperturb/random.hpp"

#ifndef KMSPERTURB_VERSION
#define KMSPERTURB_VERSION "0.0.0"
#endif

namespace kmsperturb::harness {

namespace {

using linalg::Complex;
using linalg::Spectrum;
using detail::scientific;

constexpr double kInf = std::numeric_limits<double>::infinity();
constexpr Complex kI{0.0, 1.0};
/// Below this every entry of a convergence series is treated as exact zero,
/// and ratio or order estimates are meaningless.
constexpr double kNoiseFloor = 1e-12;

struct Outcome {
  double residual = 0.0;
  double tolerance = 0.0;
  std::string detail;
};

class Context {
 public:
  Context(const SuiteConfig& cfg, const Model& model, std::uint64_t seed)
      : cfg(cfg), model(model), rng(seed) {}

  const SuiteConfig& cfg;
  const Model& model;
  Rng rng;

  const gns::GibbsSystem& sys() const { return model.sys; }
  const HermMatrix& v() const { return model.v; }
  Index dim() const { return model.sys.dim(); }
  HermMatrix zero() const { return HermMatrix::zero(dim()); }

  /// Random complex matrix with unit operator norm.
  CMatrix observable() {
    CMatrix a = random_matrix(dim(), rng);
    return a / linalg::op_norm(a);
  }
  std::vector<CMatrix> observables() {
    std::vector<CMatrix> out;
    for (int k = 0; k < cfg.observables; ++k) out.push_back(observable());
    return out;
  }
  HermMatrix direction() { return random_hermitian(dim(), 1.0, rng); }
};

using CheckFn = Outcome (*)(Context&);

struct Entry {
  CheckInfo info;
  CheckFn fn;
};

double rel(Complex a, Complex b) { return std::abs(a - b) / std::max(1.0, std::abs(b)); }

double rel_frob(const CMatrix& a, const CMatrix& b) {
  return linalg::frob_norm(a - b) / std::max(1.0, linalg::frob_norm(b));
}

std::string join(const std::vector<double>& xs) {
  std::string s;
  for (double x : xs) s += (s.empty() ? "" : " ") + scientific(x, 6);
  return s;
}

/// Successive ratios of a series expected to halve with each halving of the
/// step.  Residual max |ratio - 1/2|; a series at the noise floor is exact.
Outcome halving_ratios(const std::vector<double>& values) {
  const double top = *std::max_element(values.begin(), values.end());
  if (top <= kNoiseFloor) return {0.0, 0.1, "all values below noise floor: " + join(values)};
  std::vector<double> ratios;
  double worst = 0.0;
  for (std::size_t k = 1; k < values.size(); ++k) {
    const double r = values[k - 1] > 0.0 ? values[k] / values[k - 1] : kInf;
    ratios.push_back(r);
    worst = std::max(worst, std::isfinite(r) ? std::abs(r - 0.5) : kInf);
  }
  return {worst, 0.1, "values " + join(values) + "; ratios " + join(ratios)};
}

/// Halving sequence used by the continuity checks.
std::vector<double> halving_steps(const Context& ctx) { return ctx.cfg.probes.stability_eps; }

// ---------------------------------------------------------------------------
// linalg

Outcome linalg_eig_reconstruction(Context& ctx) {
  double worst = 0.0;
  for (const HermMatrix& m : {ctx.sys().hamiltonian(), ctx.sys().modular_generator() + ctx.v()}) {
    const Spectrum s = linalg::herm_eig(m);
    const CMatrix back = s.frame * s.eigenvalues.cast<Complex>().asDiagonal() * s.frame.adjoint();
    const CMatrix gram = s.frame.adjoint() * s.frame - CMatrix::Identity(m.dim(), m.dim());
    worst = std::max({worst, rel_frob(back, m.mat()), linalg::frob_norm(gram)});
  }
  return {worst, 1e-11, ""};
}

Outcome linalg_exp_two_path(Context& ctx) {
  const HermMatrix m = ctx.sys().modular_generator() + ctx.v();
  const Spectrum s = linalg::herm_eig(m);
  const double top = s.eigenvalues(s.dim() - 1);
  const CMatrix shifted = m.mat() - top * CMatrix::Identity(m.dim(), m.dim());
  const CMatrix taylor = linalg::expm(shifted);
  const CMatrix spectral = linalg::exp_shifted(s, 1.0, top);
  return {linalg::relative_frob_error(taylor, spectral), 1e-10, ""};
}

Outcome linalg_hs_cauchy_schwarz(Context& ctx) {
  double worst = 0.0;
  for (int k = 0; k < ctx.cfg.probes.pairs; ++k) {
    const CMatrix x = ctx.observable();
    const CMatrix y = ctx.observable();
    const double bound = linalg::frob_norm(x) * linalg::frob_norm(y);
    worst = std::max(worst, (std::abs(linalg::hs_inner(x, y)) - bound) / bound);
  }
  return {std::max(0.0, worst), 1e-14, ""};
}

// ---------------------------------------------------------------------------
// gns

Outcome gns_gibbs_invariants(Context& ctx) {
  const auto& sys = ctx.sys();
  const CMatrix& rho = sys.rho().mat();
  const CMatrix& omega = sys.omega().mat;
  const double trace_err = std::abs(rho.trace() - Complex(1.0));
  const double root_err = rel_frob(omega * omega, rho);
  const double log_err =
      rel_frob(linalg::apply_fun(sys.modular_spectrum(), linalg::RealFunction([](double k) { return std::exp(k); })), rho);
  const double norm_err = std::abs(linalg::hs_inner(omega, omega) - Complex(1.0));
  const double z_err =
      std::abs(std::log(sys.partition_function()) - sys.log_partition()) /
      std::max(1.0, std::abs(sys.log_partition()));
  std::ostringstream os;
  os << "trace " << scientific(trace_err, 3) << ", root " << scientific(root_err, 3) << ", log "
     << scientific(log_err, 3) << ", norm " << scientific(norm_err, 3);
  return {std::max({trace_err, root_err, log_err, norm_err, z_err}), 1e-12, os.str()};
}

Outcome gns_state_trace_identity(Context& ctx) {
  double worst = 0.0;
  for (const CMatrix& a : ctx.observables()) {
    const Complex direct = (ctx.sys().rho().mat() * a).trace();
    worst = std::max(worst, rel(gns::state_eval(ctx.sys().omega(), a), direct));
  }
  return {worst, 1e-12, ""};
}

Outcome gns_modular_automorphism(Context& ctx) {
  double worst = 0.0;
  for (const HermMatrix& q : {ctx.zero(), ctx.v()}) {
    const double t = 4.0 * ctx.rng.uniform() - 2.0;
    const CMatrix a = ctx.observable();
    const CMatrix b = ctx.observable();
    const CMatrix sa = gns::modular_flow(ctx.sys(), q, t, a);
    const CMatrix sb = gns::modular_flow(ctx.sys(), q, t, b);
    const CMatrix sab = gns::modular_flow(ctx.sys(), q, t, a * b);
    const CMatrix sadj = gns::modular_flow(ctx.sys(), q, t, a.adjoint());
    worst = std::max({worst, std::abs(linalg::op_norm(sa) - linalg::op_norm(a)),
                      linalg::frob_norm(sab - sa * sb), linalg::frob_norm(sadj - sa.adjoint())});
  }
  return {worst, 1e-10, ""};
}

Outcome gns_modular_group_law(Context& ctx) {
  double worst = 0.0;
  for (const HermMatrix& q : {ctx.zero(), ctx.v()}) {
    const Complex t(2.0 * ctx.rng.uniform() - 1.0, 0.6 * ctx.rng.uniform() - 0.3);
    const Complex s(2.0 * ctx.rng.uniform() - 1.0, 0.6 * ctx.rng.uniform() - 0.3);
    const CMatrix a = ctx.observable();
    const CMatrix composed =
        gns::modular_flow(ctx.sys(), q, t, gns::modular_flow(ctx.sys(), q, s, a));
    worst = std::max(worst, rel_frob(composed, gns::modular_flow(ctx.sys(), q, t + s, a)));
    worst = std::max(worst, rel_frob(gns::modular_flow(ctx.sys(), q, 0.0, a), a));
  }
  return {worst, 1e-10, ""};
}

Outcome gns_dictionary_araki_vector(Context& ctx) {
  const auto via_liouvillean =
      gns::perturbed_liouvillean_exp(ctx.sys(), ctx.v(), 0.5, ctx.sys().omega());
  const auto direct = duhamel::araki_vector_exact(ctx.sys(), ctx.v());
  return {rel_frob(via_liouvillean.mat, direct.mat), 1e-10, ""};
}

Outcome gns_s_operator(Context& ctx) {
  double worst = 0.0;
  for (const HermMatrix& q : {ctx.zero(), ctx.v()}) {
    const auto omega = duhamel::araki_vector_exact(ctx.sys(), q);
    const CMatrix a = ctx.observable();
    const gns::HSVector a_omega{a * omega.mat};
    const auto s_applied =
        gns::modular_conjugation(gns::rel_modular_apply(ctx.sys(), q, 0.5, a_omega));
    worst = std::max(worst, rel_frob(s_applied.mat, a.adjoint() * omega.mat));
  }
  return {worst, 1e-10, ""};
}

Outcome gns_liouvillean_dictionary(Context& ctx) {
  const auto& sys = ctx.sys();
  const HermMatrix& v = ctx.v();
  const gns::HSVector x{ctx.observable()};
  const auto omega_v = duhamel::araki_vector_exact(sys, v);
  const double scale = std::max(1.0, linalg::frob_norm(omega_v.mat));

  const double l_omega = linalg::frob_norm(gns::liouvillean_apply(sys, sys.omega()).mat);
  const double lv_omega =
      linalg::frob_norm(gns::relative_liouvillean_apply(sys, v, omega_v).mat) / scale;
  // L_V = L + V - JVJ
  const CMatrix lv_x = gns::liouvillean_apply(sys, x).mat + v.mat() * x.mat -
                       gns::commutant_apply(v, x).mat;
  const double lv_split = rel_frob(lv_x, gns::relative_liouvillean_apply(sys, v, x).mat);
  const auto jvj = gns::modular_conjugation(
      gns::HSVector{v.mat() * gns::modular_conjugation(x).mat});
  const double commutant = rel_frob(gns::commutant_apply(v, x).mat, jvj.mat);
  const double delta = rel_frob(gns::modular_operator_apply(sys, x).mat,
                                gns::perturbed_liouvillean_exp(sys, ctx.zero(), 1.0, x).mat);
  const double delta_rel = rel_frob(gns::modular_operator_apply(sys, x).mat,
                                    gns::rel_modular_apply(sys, ctx.zero(), 1.0, x).mat);
  std::ostringstream os;
  os << "L Omega " << scientific(l_omega, 3) << ", L_V Omega_V " << scientific(lv_omega, 3)
     << ", split " << scientific(lv_split, 3) << ", JVJ " << scientific(commutant, 3)
     << ", Delta " << scientific(std::max(delta, delta_rel), 3);
  return {std::max({l_omega, lv_omega, lv_split, commutant, delta, delta_rel}), 1e-10, os.str()};
}

Outcome gns_vector_invariance(Context& ctx) {
  const auto omega_v = duhamel::araki_vector_exact(ctx.sys(), ctx.v());
  const Complex z(ctx.rng.uniform() - 0.5, ctx.rng.uniform() - 0.5);
  const auto moved = gns::rel_modular_apply(ctx.sys(), ctx.v(), z, omega_v);
  return {rel_frob(moved.mat, omega_v.mat), 1e-10, ""};
}

Outcome kms_check(Context& ctx, const HermMatrix& q) {
  double worst = 0.0;
  for (int k = 0; k < ctx.cfg.probes.pairs; ++k) {
    const CMatrix a = ctx.observable();
    const CMatrix b = ctx.observable();
    worst = std::max(worst, gns::kms_residual(ctx.sys(), q, a, b));
  }
  return {worst, 1e-9, ""};
}

Outcome gns_kms_unperturbed(Context& ctx) { return kms_check(ctx, ctx.zero()); }
Outcome gns_kms_perturbed(Context& ctx) { return kms_check(ctx, ctx.v()); }

Outcome gns_cyclic_separating(Context& ctx) {
  // Omega_V is cyclic and separating iff it is invertible as a matrix.
  const CMatrix omega_v = duhamel::araki_vector_exact(ctx.sys(), ctx.v()).mat;
  const double smin = gns::min_singular_value(omega_v);
  const double cond = smin > 0.0 ? linalg::op_norm(omega_v) / smin : kInf;
  return {cond, 1e12, "condition number of Omega_V"};
}

Outcome gns_frame_independence(Context& ctx) {
  const CMatrix u = random_unitary(ctx.dim(), ctx.rng);
  const auto conj = [&](const CMatrix& m) -> CMatrix { return u * m * u.adjoint(); };
  const auto sys2 =
      gns::build_gibbs(HermMatrix(conj(ctx.sys().hamiltonian().mat())), ctx.sys().beta());
  const HermMatrix v2(conj(ctx.v().mat()));
  double worst = 0.0;
  for (const CMatrix& a : ctx.observables()) {
    worst = std::max(worst, rel(gns::perturbed_state(sys2, v2, conj(a)),
                                gns::perturbed_state(ctx.sys(), ctx.v(), a)));
  }
  const double u_point = ctx.rng.uniform();
  worst = std::max(worst, rel_frob(hastings::phi_spectral(sys2, v2, u_point).mat(),
                                   conj(hastings::phi_spectral(ctx.sys(), ctx.v(), u_point).mat())));
  return {worst, 1e-10, ""};
}

Outcome gns_perturbed_state_positivity(Context& ctx) {
  const auto& sys = ctx.sys();
  double worst = std::abs(gns::normalized_perturbed_state(
                              sys, ctx.v(), CMatrix::Identity(ctx.dim(), ctx.dim())) -
                          Complex(1.0));
  const double norm = std::real(gns::perturbed_state(sys, ctx.v(), CMatrix::Identity(ctx.dim(), ctx.dim())));
  for (const CMatrix& a : ctx.observables()) {
    const Complex w = gns::normalized_perturbed_state(sys, ctx.v(), a.adjoint() * a);
    worst = std::max({worst, std::abs(w.imag()), std::max(0.0, -w.real())});
    const Complex unnorm = gns::perturbed_state(sys, ctx.v(), a);
    worst = std::max(worst, rel(unnorm / norm, gns::normalized_perturbed_state(sys, ctx.v(), a)));
  }
  return {worst, 1e-12, ""};
}

// ---------------------------------------------------------------------------
// duhamel

Outcome duhamel_cocycle_unitarity(Context& ctx) {
  const CMatrix e = duhamel::cocycle_exact(ctx.sys(), ctx.v(), ctx.cfg.series.cocycle_time);
  const CMatrix id = CMatrix::Identity(ctx.dim(), ctx.dim());
  return {std::max(linalg::op_norm(e * e.adjoint() - id), linalg::op_norm(e.adjoint() * e - id)),
          1e-10, ""};
}

Outcome duhamel_cocycle_series(Context& ctx) {
  const double t = ctx.cfg.series.cocycle_time;
  const auto series = duhamel::cocycle_series(ctx.sys(), ctx.v(), t, ctx.cfg.series.cocycle_order,
                                              ctx.cfg.flow.ode());
  const CMatrix exact = duhamel::cocycle_exact(ctx.sys(), ctx.v(), t);
  return {linalg::op_norm(series.value - exact), series.tail_bound + 1e-8,
          "tail bound " + scientific(series.tail_bound, 3) + ", integrator " +
              scientific(series.integrator_error, 3)};
}

Outcome duhamel_cocycle_chain_rule(Context& ctx) {
  const double t = ctx.rng.uniform() - 0.5;
  const double s = ctx.rng.uniform() - 0.5;
  return {duhamel::cocycle_chain_rule_residual(ctx.sys(), ctx.v(), t, s), 1e-9, ""};
}

Outcome duhamel_perturbed_flow(Context& ctx) {
  double worst = 0.0;
  for (const CMatrix& a : ctx.observables()) {
    const double t = 2.0 * ctx.rng.uniform() - 1.0;
    worst = std::max(worst, duhamel::perturbed_flow_check(ctx.sys(), ctx.v(), t, a));
  }
  return {worst, 1e-10, ""};
}

Outcome duhamel_araki_series(Context& ctx) {
  const auto series =
      duhamel::araki_vector_series(ctx.sys(), ctx.v(), ctx.cfg.series.araki_order, ctx.cfg.flow.ode());
  const auto exact = duhamel::araki_vector_exact(ctx.sys(), ctx.v());
  return {linalg::frob_norm(series.value.mat - exact.mat), series.tail_bound + 1e-8,
          "tail bound " + scientific(series.tail_bound, 3) + ", integrator " +
              scientific(series.integrator_error, 3)};
}

HermMatrix physical_perturbation(const Context& ctx) {
  if (ctx.cfg.model.perturbation.convention == Convention::physical) return ctx.model.v_input;
  return ctx.v() * (-1.0 / ctx.sys().beta());
}

Outcome duhamel_factorization(Context& ctx) {
  return {duhamel::duhamel_factorization_check(ctx.sys(), physical_perturbation(ctx),
                                               ctx.sys().beta()),
          1e-10, ""};
}

Outcome duhamel_araki_derivative(Context& ctx) {
  const double h = ctx.cfg.probes.fd_steps.back();
  const double r = duhamel::araki_derivative_residual(ctx.sys(), ctx.v(), ctx.cfg.probes.flow_point, h);
  return {r, 1e-6, "h = " + scientific(h, 1)};
}

/// Round-off level of a central difference of a quantity of size `scale`
/// computed through a d x d eigendecomposition.
double difference_floor(Index dim, double scale, double h) {
  return 16.0 * static_cast<double>(dim) * std::numeric_limits<double>::epsilon() *
         std::max(1.0, scale) / h;
}

/// Observed convergence order between steps h1 > h2, expected to be 2.  When
/// the error predicted at h2 lies below the round-off floor the order cannot
/// be measured and the check reports zero.
Outcome order_outcome(double r1, double h1, double r2, double h2, double floor2) {
  std::string detail = "residuals " + scientific(r1, 3) + " at h = " + scientific(h1, 1) + ", " +
                       scientific(r2, 3) + " at h = " + scientific(h2, 1);
  const double predicted = r1 * (h2 / h1) * (h2 / h1);
  if (r1 <= kNoiseFloor || predicted < floor2)
    return {0.0, 0.3,
            detail + "; predicted error at h2 " + scientific(predicted, 2) +
                " is below the round-off floor " + scientific(floor2, 2) + ", order not measurable"};
  const double order = hastings::observed_order(r1, h1, r2, h2);
  return {std::isfinite(order) ? std::abs(order - 2.0) : kInf, 0.3,
          detail + "; observed order " + scientific(order, 4)};
}

Outcome duhamel_araki_derivative_order(Context& ctx) {
  const auto& steps = ctx.cfg.probes.fd_steps;
  const double s = ctx.cfg.probes.flow_point;
  const double h1 = steps[steps.size() - 2];
  const double h2 = steps.back();
  const double scale = linalg::frob_norm(duhamel::araki_vector_exact(ctx.sys(), ctx.v() * s).mat);
  return order_outcome(duhamel::araki_derivative_residual(ctx.sys(), ctx.v(), s, h1), h1,
                       duhamel::araki_derivative_residual(ctx.sys(), ctx.v(), s, h2), h2,
                       difference_floor(ctx.dim(), scale, h2));
}

Outcome duhamel_araki_continuity(Context& ctx) {
  const HermMatrix w = ctx.direction();
  const CMatrix base = duhamel::araki_vector_exact(ctx.sys(), ctx.v()).mat;
  std::vector<double> values;
  for (double eps : halving_steps(ctx))
    values.push_back(
        linalg::frob_norm(duhamel::araki_vector_exact(ctx.sys(), ctx.v() + w * eps).mat - base));
  return halving_ratios(values);
}

// ---------------------------------------------------------------------------
// kernel

std::vector<double> kernel_grid() {
  std::vector<double> xs;
  for (int k = 0; k <= 100; ++k) xs.push_back(-20.0 + 0.4 * k);
  return xs;
}

Outcome kernel_l1_mass(Context& ctx) {
  const auto r = kernel::fourier_transform(0.0, ctx.cfg.quadrature());
  return {std::abs(r.value - Complex(kernel::kKernelL1Norm)), 1e-9,
          "quadrature estimate " + scientific(r.error_estimate, 3)};
}

Outcome kernel_raw_l1_mass(Context& ctx) {
  const auto r = kernel::fourier_transform(0.0, ctx.cfg.quadrature());
  const double raw = 2.0 * std::numbers::pi * r.value.real();
  return {std::abs(raw - std::numbers::pi), 1e-8, ""};
}

Outcome kernel_fourier_pair(Context& ctx) {
  const auto spec = ctx.cfg.quadrature();
  double worst = 0.0;
  for (double x : kernel_grid()) worst = std::max(worst, kernel::fourier_residual(x, spec));
  return {worst, 1e-8, "101 points on [-20, 20]"};
}

Outcome kernel_g_f_identity(Context&) {
  double worst = 0.0;
  for (double x : kernel_grid())
    worst = std::max(worst, std::abs(kernel::G_eval(std::exp(x)) - kernel::F_eval(x)));
  return {worst, 1e-14, ""};
}

Outcome kernel_series_consistency(Context&) {
  double worst = 0.0;
  for (int k = 0; k <= 42; ++k) {
    const double t = std::pow(10.0, -6.0 + k / 6.0);
    // Enough terms that the remainder is far below double precision.
    const int terms = static_cast<int>(std::ceil(40.0 / (2.0 * std::numbers::pi * t))) + 4;
    const double closed = kernel::f_eval(t);
    const double series = kernel::f_series(t, terms);
    const double tail = kernel::f_series_tail(t, terms);
    const double gap = std::max(0.0, std::abs(closed - series) - tail);
    worst = std::max(worst, gap / std::max(1e-300, std::abs(closed)));
  }
  return {worst, 1e-10, "log grid t in [1e-6, 10], relative"};
}

Outcome kernel_tail_bound(Context&) {
  double worst = 0.0;
  std::ostringstream os;
  for (double cutoff : {0.5, 1.0, 2.0, 4.0}) {
    const GaussLegendre rule = composite_gauss_legendre(cutoff, cutoff + 12.0, 96, 16);
    double one_sided = 0.0;
    for (std::size_t k = 0; k < rule.nodes.size(); ++k)
      one_sided += rule.weights[k] * kernel::kernel_density(rule.nodes[k]);
    const double mass = kernel::tail_mass(cutoff).mass;
    const double err = std::abs(2.0 * one_sided - mass) / mass;
    worst = std::max(worst, err);
    os << "T=" << cutoff << ": " << scientific(mass, 6) << " ";
  }
  return {worst, 1e-9, os.str()};
}

Outcome kernel_symmetries(Context&) {
  int violations = 0;
  double prev = kInf;
  for (int k = 1; k <= 400; ++k) {
    const double t = 0.025 * k;
    const double f = kernel::f_eval(t);
    if (f < 0.0 || f > prev || f != kernel::f_eval(-t)) ++violations;
    prev = f;
  }
  for (double x : kernel_grid()) {
    const double big_f = kernel::F_eval(x);
    if (big_f > 0.5 || big_f <= 0.0 || big_f != kernel::F_eval(-x)) ++violations;
    const double lam = std::exp(x);
    if (std::abs(kernel::G_eval(lam) - kernel::G_eval(1.0 / lam)) > 1e-15) ++violations;
  }
  return {static_cast<double>(violations), 0.0, "count of violated sign/monotonicity/parity tests"};
}

// ---------------------------------------------------------------------------
// hastings

Outcome hastings_phi_norm_bound(Context& ctx) {
  double worst = 0.0;
  for (int k = 0; k < ctx.cfg.probes.phi_samples; ++k) {
    const HermMatrix v =
        k == 0 && linalg::op_norm(ctx.v().mat()) > 0.0 ? ctx.v() : ctx.direction() * (2.0 * ctx.rng.uniform() + 0.05);
    const double u = ctx.rng.uniform();
    const double bound = kernel::kKernelL1Norm * linalg::op_norm(v.mat());
    const double norm = linalg::op_norm(hastings::phi_spectral(ctx.sys(), v, u).mat());
    worst = std::max(worst, norm / bound - 1.0);
  }
  return {std::max(0.0, worst), 1e-8, "relative excess over ||V||/2"};
}

Outcome hastings_phi_hermitian(Context& ctx) {
  double worst = 0.0;
  for (double u : {0.0, 0.5, 1.0}) {
    const CMatrix phi = hastings::phi_spectral_matrix(ctx.sys(), ctx.v(), u);
    worst = std::max(worst, linalg::hermitian_asymmetry(phi) /
                                std::max(1.0, linalg::op_norm(ctx.v().mat())));
  }
  return {worst, 1e-10, ""};
}

Outcome hastings_phi_two_path(Context& ctx) {
  const auto spec = ctx.cfg.quadrature();
  const double scale = std::max(1.0, linalg::frob_norm(ctx.v().mat()));
  double worst = 0.0;
  for (double u : {0.0, 0.5, 1.0}) {
    const auto quad = hastings::phi_quadrature(ctx.sys(), ctx.v(), u, spec);
    worst = std::max(worst, linalg::frob_norm(quad.value.mat() -
                                              hastings::phi_spectral(ctx.sys(), ctx.v(), u).mat()));
  }
  return {worst, 10.0 * ctx.cfg.quadrature_tolerance * scale, ""};
}

Outcome hastings_theta_two_path(Context& ctx) {
  const auto dyson = hastings::theta_dyson(ctx.sys(), ctx.v(), 1.0, ctx.cfg.flow.series_order,
                                           ctx.cfg.flow.ode());
  const auto ode = hastings::theta_ode(ctx.sys(), ctx.v(), 1.0, ctx.cfg.flow);
  return {linalg::frob_norm(dyson.value - ode.value), dyson.tail_bound + 1e-8,
          "tail bound " + scientific(dyson.tail_bound, 3) + ", ode steps " +
              std::to_string(ode.steps)};
}

Outcome hastings_theta_norm_bound(Context& ctx) {
  const auto ode = hastings::theta_ode(ctx.sys(), ctx.v(), 1.0, ctx.cfg.flow);
  const double bound = std::exp(kernel::kKernelL1Norm * linalg::op_norm(ctx.v().mat()));
  return {std::max(0.0, linalg::op_norm(ode.value) / bound - 1.0), 1e-8, ""};
}

Outcome hastings_main_theorem(Context& ctx) {
  const auto theta = hastings::theta_ode(ctx.sys(), ctx.v(), 1.0, ctx.cfg.flow);
  double worst = 0.0;
  for (const CMatrix& a : ctx.observables()) {
    worst = std::max(worst, rel(hastings::hastings_state(ctx.sys(), theta.value, a),
                                hastings::gibbs_expectation(ctx.sys(), ctx.v(), a)));
  }
  return {worst, 1e-6, "ode steps " + std::to_string(theta.steps)};
}

Outcome hastings_physical_units(Context& ctx) {
  const auto& sys = ctx.sys();
  const HermMatrix total = sys.hamiltonian() + physical_perturbation(ctx);
  const Spectrum s = linalg::herm_eig(total);
  // e^{-beta(H + V_phys)} / Z, shifted by the smallest eigenvalue of total.
  const double shift = s.eigenvalues(0);
  const CMatrix boltz = linalg::exp_shifted(s, -sys.beta(), shift) *
                        std::exp(-sys.beta() * shift - sys.log_partition());
  double worst = 0.0;
  for (const CMatrix& a : ctx.observables())
    worst = std::max(worst, rel(hastings::gibbs_expectation(sys, ctx.v(), a), (boltz * a).trace()));
  return {worst, 1e-10, ""};
}

Outcome hastings_g_delta_identity(Context& ctx) {
  double worst = 0.0;
  for (double s : {0.0, ctx.cfg.probes.flow_point, 1.0})
    worst = std::max(worst, hastings::g_delta_identity_residual(ctx.sys(), ctx.v(), s));
  return {worst, 1e-9, ""};
}

Outcome hastings_derivative_integral_form(Context& ctx) {
  const double s = ctx.cfg.probes.flow_point;
  double worst = 0.0;
  for (const CMatrix& a : ctx.observables()) {
    worst = std::max(worst, rel(hastings::flow_derivative_integral(ctx.sys(), ctx.v(), s, a),
                                hastings::flow_derivative_phi(ctx.sys(), ctx.v(), s, a)));
  }
  return {worst, 1e-9, ""};
}

Outcome hastings_flow_equation(Context& ctx) {
  const double h = ctx.cfg.probes.fd_steps.back();
  double worst = 0.0;
  for (const CMatrix& a : ctx.observables())
    worst = std::max(worst, hastings::flow_equation_residual(ctx.sys(), ctx.v(),
                                                             ctx.cfg.probes.flow_point, a, h));
  return {worst, 1e-6, "h = " + scientific(h, 1)};
}

Outcome hastings_flow_equation_order(Context& ctx) {
  const auto& steps = ctx.cfg.probes.fd_steps;
  const double s = ctx.cfg.probes.flow_point;
  const double h1 = steps[steps.size() - 2];
  const double h2 = steps.back();
  const double norm = linalg::frob_norm(duhamel::araki_vector_exact(ctx.sys(), ctx.v() * s).mat);
  const double floor2 = difference_floor(ctx.dim(), norm * norm, h2);
  Outcome worst{0.0, 0.3, ""};
  for (const CMatrix& a : ctx.observables()) {
    const Outcome o =
        order_outcome(hastings::flow_equation_residual(ctx.sys(), ctx.v(), s, a, h1), h1,
                      hastings::flow_equation_residual(ctx.sys(), ctx.v(), s, a, h2), h2, floor2);
    if (worst.detail.empty() || o.residual > worst.residual) worst = o;
  }
  return worst;
}

Outcome hastings_stability(Context& ctx) {
  const HermMatrix w = ctx.direction();
  return halving_ratios(
      hastings::stability_residual(ctx.sys(), ctx.v(), w, halving_steps(ctx), ctx.cfg.flow));
}

Outcome hastings_phi_u_continuity(Context& ctx) {
  return halving_ratios(
      hastings::phi_u_continuity(ctx.sys(), ctx.v(), ctx.cfg.probes.flow_point, halving_steps(ctx)));
}

Outcome hastings_phi_v_continuity(Context& ctx) {
  const HermMatrix w = ctx.direction();
  const CMatrix probe = ctx.observable();
  return halving_ratios(hastings::phi_v_continuity(ctx.sys(), ctx.v(), w,
                                                   ctx.cfg.probes.flow_point, probe,
                                                   halving_steps(ctx)));
}

Outcome hastings_cauchy_schwarz(Context& ctx) {
  const auto& sys = ctx.sys();
  const double unit =
      hastings::gibbs_expectation(sys, ctx.v(), CMatrix::Identity(ctx.dim(), ctx.dim())).real();
  double worst = 0.0;
  for (int k = 0; k < ctx.cfg.probes.pairs; ++k) {
    const CMatrix a = ctx.observable();
    const CMatrix b = ctx.observable();
    // |w(A)| <= w(I) ||A||
    worst = std::max(worst, std::abs(hastings::gibbs_expectation(sys, ctx.v(), a)) /
                                    (unit * linalg::op_norm(a)) - 1.0);
    // |w(B*A)|^2 <= w(A*A) w(B*B)
    const double aa = hastings::gibbs_expectation(sys, ctx.v(), a.adjoint() * a).real();
    const double bb = hastings::gibbs_expectation(sys, ctx.v(), b.adjoint() * b).real();
    const double ab = std::norm(hastings::gibbs_expectation(sys, ctx.v(), b.adjoint() * a));
    worst = std::max(worst, (ab - aa * bb) / (aa * bb));
  }
  return {std::max(0.0, worst), 1e-12, "relative excess over the Cauchy-Schwarz bounds"};
}

// ---------------------------------------------------------------------------

const std::vector<Entry>& registry() {
  static const std::vector<Entry> entries = {
      {{"linalg.eig_reconstruction", "linalg", "plumbing", {"eigendecomposition", "input"}},
       linalg_eig_reconstruction},
      {{"linalg.exp_two_path", "linalg", "plumbing", {"taylor_scaling_squaring", "spectral"}},
       linalg_exp_two_path},
      {{"linalg.hs_cauchy_schwarz", "linalg", "plumbing", {"hs_inner", "frob_norm"}},
       linalg_hs_cauchy_schwarz},

      {{"gns.gibbs_invariants", "gns",
        "Gibbs state rho = e^{-beta H}/Z with Omega = rho^{1/2} and K = log rho",
        {"spectral", "direct"}},
       gns_gibbs_invariants},
      {{"gns.state_trace_identity", "gns", "omega(A) = <Omega, A Omega> = Tr(rho A)",
        {"state_eval", "trace"}},
       gns_state_trace_identity},
      {{"gns.modular_automorphism", "gns",
        "sigma^Q_t is an isometric *-automorphism for real t", {"modular_flow"}},
       gns_modular_automorphism},
      {{"gns.modular_group_law", "gns", "sigma_z sigma_w = sigma_{z+w}, sigma_0 = id",
        {"modular_flow", "modular_flow"}},
       gns_modular_group_law},
      {{"gns.dictionary_araki_vector", "gns", "Omega_Q = e^{(L+Q)/2} Omega = e^{(K+Q)/2}",
        {"perturbed_liouvillean_exp", "araki_vector_exact"}},
       gns_dictionary_araki_vector},
      {{"gns.s_operator", "gns", "J Delta^{1/2} A Omega = A* Omega for Omega and Omega_V",
        {"rel_modular_apply", "modular_conjugation"}},
       gns_s_operator},
      {{"gns.liouvillean_dictionary", "gns",
        "L Omega = 0, L_V = L + V - JVJ annihilates Omega_V, Delta = e^L",
        {"liouvillean_apply", "relative_liouvillean_apply", "commutant_apply",
         "modular_operator_apply"}},
       gns_liouvillean_dictionary},
      {{"gns.vector_invariance", "gns", "Delta_{Omega_V}^z Omega_V = Omega_V",
        {"rel_modular_apply"}},
       gns_vector_invariance},
      {{"gns.kms_unperturbed", "gns", "KMS condition at beta = -1 for the state omega",
        {"modular_flow(-i)", "state"}},
       gns_kms_unperturbed},
      {{"gns.kms_perturbed", "gns", "KMS condition at beta = -1 for the perturbed state omega_V",
        {"modular_flow(-i)", "perturbed_state"}},
       gns_kms_perturbed},
      {{"gns.cyclic_separating", "gns", "Omega_V is cyclic and separating",
        {"araki_vector_exact", "min_singular_value"}},
       gns_cyclic_separating},
      {{"gns.frame_independence", "gns", "plumbing", {"original_frame", "rotated_frame"}},
       gns_frame_independence},
      {{"gns.perturbed_state_positivity", "gns",
        "omega_V(A) = Tr(e^{K+V} A) is a positive functional",
        {"perturbed_state", "normalized_perturbed_state"}},
       gns_perturbed_state_positivity},

      {{"duhamel.cocycle_unitarity", "duhamel", "Gamma_t = e^{it(K+Q)} e^{-itK} is unitary",
        {"cocycle_exact"}},
       duhamel_cocycle_unitarity},
      {{"duhamel.cocycle_series", "duhamel",
        "Dyson expansion of the cocycle with factorial tail bound",
        {"cocycle_series", "cocycle_exact"}},
       duhamel_cocycle_series},
      {{"duhamel.cocycle_chain_rule", "duhamel", "Gamma_{t+s} = Gamma_t sigma_t(Gamma_s)",
        {"cocycle_exact", "modular_flow"}},
       duhamel_cocycle_chain_rule},
      {{"duhamel.perturbed_flow", "duhamel", "sigma^Q_t(A) = Gamma_t sigma_t(A) Gamma_t*",
        {"modular_flow", "cocycle_exact"}},
       duhamel_perturbed_flow},
      {{"duhamel.araki_series", "duhamel",
        "expansion of Omega_Q over ordered simplices with factorial tail bound",
        {"araki_vector_series", "araki_vector_exact"}},
       duhamel_araki_series},
      {{"duhamel.factorization", "duhamel",
        "e^{-beta(H+V)} = E e^{-beta H} E* with E = e^{-beta(H+V)/2} e^{beta H/2}",
        {"ordered_product", "spectral"}},
       duhamel_factorization},
      {{"duhamel.araki_derivative", "duhamel",
        "d/ds Omega_{sV} = (1/2) int_0^1 sigma^{sV}_{-iu/2}(V) du Omega_{sV}",
        {"central_difference", "araki_derivative"}},
       duhamel_araki_derivative},
      {{"duhamel.araki_derivative_order", "duhamel", "plumbing",
        {"central_difference", "araki_derivative"}},
       duhamel_araki_derivative_order},
      {{"duhamel.araki_continuity", "duhamel", "Omega_V depends Lipschitz-continuously on V",
        {"araki_vector_exact"}},
       duhamel_araki_continuity},

      {{"kernel.l1_mass", "kernel", "int k(t) dt = F(0) = 1/2 for k = f/(2 pi)",
        {"quadrature", "closed_form"}},
       kernel_l1_mass},
      {{"kernel.raw_l1_mass", "kernel", "int f(t) dt = pi", {"quadrature", "closed_form"}},
       kernel_raw_l1_mass},
      {{"kernel.fourier_pair", "kernel", "int k(t) e^{ixt} dt = F(x)",
        {"fourier_transform", "F_eval"}},
       kernel_fourier_pair},
      {{"kernel.g_f_identity", "kernel", "F(x) = G(e^x)", {"G_eval", "F_eval"}},
       kernel_g_f_identity},
      {{"kernel.series_consistency", "kernel",
        "f(t) = sum_n 2/(n+1/2) e^{-2 pi (n+1/2)|t|}", {"f_series", "f_eval"}},
       kernel_series_consistency},
      {{"kernel.tail_bound", "kernel", "tail mass of the kernel beyond |t| > T",
        {"tail_mass", "gauss_legendre"}},
       kernel_tail_bound},
      {{"kernel.symmetries", "kernel", "f even, positive, decreasing; F even; G(1/l) = G(l)",
        {"f_eval", "F_eval", "G_eval"}},
       kernel_symmetries},

      {{"hastings.phi_norm_bound", "hastings", "||Phi(V;u)|| <= ||V||/2", {"phi_spectral"}},
       hastings_phi_norm_bound},
      {{"hastings.phi_hermitian", "hastings", "Phi(V;u) is Hermitian", {"phi_spectral_matrix"}},
       hastings_phi_hermitian},
      {{"hastings.phi_two_path", "hastings",
        "Phi(V;u) = int f(t) sigma_t(V) dt as an operator integral",
        {"phi_quadrature", "phi_spectral"}},
       hastings_phi_two_path},
      {{"hastings.theta_two_path", "hastings",
        "theta as ordered exponential of Phi, Dyson series with factorial tail",
        {"theta_dyson", "theta_ode"}},
       hastings_theta_two_path},
      {{"hastings.theta_norm_bound", "hastings", "||theta(V;s)|| <= e^{s ||V||/2}",
        {"theta_ode"}},
       hastings_theta_norm_bound},
      {{"hastings.main_theorem", "hastings",
        "main identity omega_V(A) = <theta Omega, A theta Omega>",
        {"hastings_state", "gibbs_expectation"}},
       hastings_main_theorem},
      {{"hastings.physical_units", "hastings",
        "omega_V(A) = Tr(e^{-beta(H+V_phys)} A)/Z with V = -beta V_phys",
        {"modular", "physical"}},
       hastings_physical_units},
      {{"hastings.g_delta_identity", "hastings", "Phi Omega_s = G(Delta_{Omega_s}) V Omega_s",
        {"phi_spectral", "G_eval"}},
       hastings_g_delta_identity},
      {{"hastings.derivative_integral_form", "hastings",
        "d/ds omega_{sV}(A) as an integral of the imaginary-time flow equals the Phi form",
        {"flow_derivative_integral", "flow_derivative_phi"}},
       hastings_derivative_integral_form},
      {{"hastings.flow_equation", "hastings",
        "d/ds <Omega_s, A Omega_s> = <Phi Omega_s, A Omega_s> + <Omega_s, A Phi Omega_s>",
        {"flow_derivative_fd", "flow_derivative_phi"}},
       hastings_flow_equation},
      {{"hastings.flow_equation_order", "hastings", "plumbing",
        {"flow_derivative_fd", "flow_derivative_phi"}},
       hastings_flow_equation_order},
      {{"hastings.stability", "hastings",
        "theta(V)Omega depends Lipschitz-continuously on V", {"theta_ode"}},
       hastings_stability},
      {{"hastings.phi_u_continuity", "hastings", "Phi(V;u) is continuous in u",
        {"phi_spectral"}},
       hastings_phi_u_continuity},
      {{"hastings.phi_v_continuity", "hastings", "Phi(V;u) is continuous in V",
        {"phi_spectral"}},
       hastings_phi_v_continuity},
      {{"hastings.cauchy_schwarz", "hastings",
        "|omega_V(A)| <= omega_V(I) ||A|| and |omega_V(B*A)|^2 <= omega_V(A*A) omega_V(B*B)", {"gibbs_expectation"}},
       hastings_cauchy_schwarz},
  };
  return entries;
}

std::uint64_t name_hash(std::string_view s) {
  std::uint64_t h = 0xcbf29ce484222325ULL;
  for (const unsigned char c : s) {
    h ^= c;
    h *= 0x100000001b3ULL;
  }
  return h;
}

bool selected(const std::string& name, const std::vector<std::string>& selectors) {
  if (selectors.empty()) return true;
  for (const auto& s : selectors)
    if (name == s || name.rfind(s + ".", 0) == 0) return true;
  return false;
}

std::string utc_timestamp() {
  const auto now = std::chrono::system_clock::now();
  const std::time_t t = std::chrono::system_clock::to_time_t(now);
  std::tm tm{};
  gmtime_r(&t, &tm);
  char buf[32];
  std::strftime(buf, sizeof buf, "%Y-%m-%dT%H:%M:%SZ", &tm);
  return buf;
}

CheckRecord run_one(const Entry& entry, const SuiteConfig& cfg, const Model& model) {
  CheckRecord rec;
  rec.name = entry.info.name;
  rec.anchor = entry.info.anchor;
  rec.paths = entry.info.paths;
  const auto start = std::chrono::steady_clock::now();
  try {
    Context ctx(cfg, model, derive_seed(cfg.seed, name_hash(entry.info.name)));
    Outcome o = entry.fn(ctx);
    rec.residual = o.residual;
    rec.tolerance = o.tolerance;
    rec.detail = std::move(o.detail);
  } catch (const std::exception& e) {
    rec.residual = kInf;
    rec.tolerance = 0.0;
    rec.detail = std::string("error: ") + e.what();
  }
  if (const auto it = cfg.tolerance_overrides.find(rec.name); it != cfg.tolerance_overrides.end())
    rec.tolerance = it->second;
  rec.pass = rec.residual <= rec.tolerance;
  rec.runtime_ms =
      std::chrono::duration<double, std::milli>(std::chrono::steady_clock::now() - start).count();
  return rec;
}

}  // namespace

const std::vector<CheckInfo>& check_catalog() {
  static const std::vector<CheckInfo> infos = [] {
    std::vector<CheckInfo> out;
    for (const auto& e : registry()) out.push_back(e.info);
    return out;
  }();
  return infos;
}

std::vector<CheckInfo> select_checks(const SuiteConfig& cfg) {
  for (const auto& s : cfg.checks) {
    const bool hit = std::any_of(registry().begin(), registry().end(), [&](const Entry& e) {
      return selected(e.info.name, {s});
    });
    if (!hit) throw ConfigError("field 'checks': '" + s + "' matches no check");
  }
  for (const auto& [name, tol] : cfg.tolerance_overrides) {
    const bool hit = std::any_of(registry().begin(), registry().end(),
                                 [&](const Entry& e) { return e.info.name == name; });
    if (!hit) throw ConfigError("field 'tolerance_overrides." + name + "': no such check");
  }
  std::vector<CheckInfo> out;
  for (const auto& e : registry())
    if (selected(e.info.name, cfg.checks)) out.push_back(e.info);
  return out;
}

void parallel_for(std::size_t count, int jobs, const std::function<void(std::size_t)>& body) {
  const std::size_t workers =
      std::min<std::size_t>(count, static_cast<std::size_t>(std::max(1, jobs)));
  if (workers <= 1) {
    for (std::size_t i = 0; i < count; ++i) body(i);
    return;
  }
  std::atomic<std::size_t> next{0};
  std::exception_ptr first_error;
  std::mutex error_mutex;
  std::vector<std::thread> threads;
  for (std::size_t w = 0; w < workers; ++w) {
    threads.emplace_back([&] {
      for (std::size_t i = next++; i < count; i = next++) {
        try {
          body(i);
        } catch (...) {
          std::lock_guard<std::mutex> lock(error_mutex);
          if (!first_error) first_error = std::current_exception();
        }
      }
    });
  }
  for (auto& t : threads) t.join();
  if (first_error) std::rethrow_exception(first_error);
}

VerificationReport run_suite(const SuiteConfig& cfg, const RunOptions& options) {
  cfg.validate();
  const std::vector<CheckInfo> chosen = select_checks(cfg);
  const Model model = build_model(cfg.model, cfg.seed);

  std::vector<const Entry*> entries;
  for (const auto& info : chosen)
    for (const auto& e : registry())
      if (e.info.name == info.name) entries.push_back(&e);

  VerificationReport report;
  report.meta.seed = cfg.seed;
  report.meta.dim = static_cast<long>(model.sys.dim());
  report.meta.beta = model.sys.beta();
  report.meta.config_hash = config_hash(cfg);
  report.meta.artifact_version = artifact_version();
  report.meta.timestamp = utc_timestamp();
  report.records.resize(entries.size());

  // Each worker writes only its own slot; the report order is the catalog order.
  parallel_for(entries.size(), options.jobs, [&](std::size_t i) {
    report.records[i] = run_one(*entries[i], cfg, model);
    if (options.progress) options.progress->fetch_add(1, std::memory_order_relaxed);
  });
  return report;
}

bool VerificationReport::all_pass() const { return failures() == 0; }

std::size_t VerificationReport::failures() const {
  return static_cast<std::size_t>(
      std::count_if(records.begin(), records.end(), [](const CheckRecord& r) { return !r.pass; }));
}

int exit_code(const VerificationReport& report) { return report.all_pass() ? 0 : 1; }

std::string artifact_version() { return KMSPERTURB_VERSION; }

std::string report_to_json(const VerificationReport& report, bool include_timing) {
  using detail::json;
  json j;
  j["schema_version"] = report.meta.schema_version;
  j["metadata"] = {{"seed", report.meta.seed},
                   {"dim", report.meta.dim},
                   {"beta", detail::exact_decimal(report.meta.beta)},
                   {"config_hash", report.meta.config_hash},
                   {"artifact_version", report.meta.artifact_version}};
  if (include_timing) j["timestamp"] = {{"utc", report.meta.timestamp}};
  j["summary"] = {{"total", report.records.size()},
                  {"passed", report.records.size() - report.failures()},
                  {"failed", report.failures()},
                  {"all_pass", report.all_pass()}};
  json checks = json::array();
  for (const auto& r : report.records) {
    json c = {{"name", r.name},
              {"anchor", r.anchor},
              {"residual", scientific(r.residual, 16)},
              {"tolerance", scientific(r.tolerance, 16)},
              {"pass", r.pass},
              {"paths", r.paths},
              {"detail", r.detail}};
    if (include_timing) c["runtime_ms"] = std::round(r.runtime_ms * 1000.0) / 1000.0;
    checks.push_back(std::move(c));
  }
  j["checks"] = std::move(checks);
  return j.dump(2) + "\n";
}

}  // namespace kmsperturb::harness
