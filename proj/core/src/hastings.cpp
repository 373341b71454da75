#include "kmsperturb/hastings.hpp"

#include <cmath>
#include <sstream>

#include "kmsperturb/duhamel.hpp"
#include "kmsperturb/errors.hpp"
#include "kmsperturb/gauss_legendre.hpp"

namespace kmsperturb::hastings {

using linalg::Index;
using linalg::Spectrum;

namespace {

constexpr Complex kI{0.0, 1.0};

GaussLegendre unit_rule(double spread) {
  const int panels = std::max(1, static_cast<int>(std::ceil(spread / 4.0)));
  return composite_gauss_legendre(0.0, 1.0, panels, 24);
}

}  // namespace

void FlowSpec::validate() const {
  if (!(tolerance > 0.0)) throw InvalidArgument("FlowSpec: tolerance must be > 0");
  if (!(max_step > 0.0)) throw InvalidArgument("FlowSpec: max_step must be > 0");
  if (series_order < 0) throw InvalidArgument("FlowSpec: series_order must be >= 0");
}

ordered_exp::OdeSettings FlowSpec::ode() const {
  ordered_exp::OdeSettings s;
  s.tolerance = tolerance;
  s.max_step = max_step;
  return s;
}

CMatrix phi_spectral_matrix(const GibbsSystem& sys, const HermMatrix& v, double u) {
  linalg::require_same_dim(sys.rho().mat(), v.mat(), "phi_spectral");
  const Spectrum ms = sys.perturbed_spectrum(v * u);
  CMatrix vp = linalg::to_eigenbasis(ms, v.mat());
  const Index n = ms.dim();
  for (Index i = 0; i < n; ++i)
    for (Index j = 0; j < n; ++j) {
      // F(0) = 1/2 on degenerate pairs; F_eval never divides by zero.
      const double gap = i == j ? 0.0 : ms.eigenvalues(i) - ms.eigenvalues(j);
      vp(i, j) *= kernel::F_eval(gap);
    }
  return linalg::from_eigenbasis(ms, vp);
}

HermMatrix phi_spectral(const GibbsSystem& sys, const HermMatrix& v, double u) {
  return HermMatrix(phi_spectral_matrix(sys, v, u));
}

PhiQuadrature phi_quadrature(const GibbsSystem& sys, const HermMatrix& v, double u,
                             const kernel::QuadratureSpec& spec) {
  linalg::require_same_dim(sys.rho().mat(), v.mat(), "phi_quadrature");
  const kernel::KernelRulePair rules = kernel::kernel_rules(spec);
  const Spectrum ms = sys.perturbed_spectrum(v * u);
  const CMatrix& vm = v.mat();
  auto integrate = [&](const kernel::KernelRule& rule) {
    CMatrix acc = CMatrix::Zero(vm.rows(), vm.cols());
    for (std::size_t k = 0; k < rule.nodes.size(); ++k) {
      // sigma_t(V) + sigma_{-t}(V) with U = e^{it(K+uV)}
      const CMatrix unitary = linalg::exp_shifted(ms, kI * rule.nodes[k]);
      acc += rule.weights[k] *
             (unitary * vm * unitary.adjoint() + unitary.adjoint() * vm * unitary);
    }
    return acc;
  };
  const CMatrix fine = integrate(rules.fine);
  const CMatrix coarse = integrate(rules.coarse);
  const double scale = std::max(1.0, linalg::frob_norm(vm));
  const double estimate = linalg::frob_norm(fine - coarse);
  if (estimate > spec.tolerance * scale) {
    std::ostringstream os;
    os << "phi_quadrature: error estimate " << estimate << " exceeds tolerance "
       << spec.tolerance * scale << " with " << spec.nodes_per_unit << " nodes per unit";
    throw QuadratureBudgetError(os.str(), estimate);
  }
  const double tail = kernel::tail_mass(spec.cutoff).mass;
  return {HermMatrix(0.5 * (fine + fine.adjoint())), estimate,
          (spec.tolerance + tail) * scale};
}

ThetaResult theta_ode(const GibbsSystem& sys, const HermMatrix& v, double s,
                      const FlowSpec& flow) {
  flow.validate();
  linalg::require_same_dim(sys.rho().mat(), v.mat(), "theta_ode");
  const ordered_exp::Generator gen = [&](double u) { return phi_spectral(sys, v, u).mat(); };
  const auto r = ordered_exp::solve_flow(gen, sys.dim(), s, ordered_exp::Side::left, flow.ode());
  return {r.value, r.error_estimate, r.steps};
}

ThetaSeries theta_dyson(const GibbsSystem& sys, const HermMatrix& v, double s, int order,
                        const ordered_exp::OdeSettings& settings) {
  if (order < 0) {
    std::ostringstream os;
    os << "theta_dyson: order must be non-negative, got " << order;
    throw InvalidArgument(os.str());
  }
  linalg::require_same_dim(sys.rho().mat(), v.mat(), "theta_dyson");
  const ordered_exp::Generator gen = [&](double u) { return phi_spectral(sys, v, u).mat(); };
  const auto d =
      ordered_exp::dyson_terms(gen, sys.dim(), s, order, ordered_exp::Side::left, settings);
  ThetaSeries out;
  out.value = d.sum();
  out.tail_bound =
      ordered_exp::exp_tail(std::abs(s) * kernel::kKernelL1Norm * linalg::op_norm(v.mat()), order);
  out.integrator_error = d.error_estimate;
  out.terms = d.terms;
  return out;
}

Complex hastings_state(const GibbsSystem& sys, const CMatrix& theta, const CMatrix& a) {
  linalg::require_same_dim(sys.rho().mat(), a, "hastings_state");
  const CMatrix xi = theta * sys.omega().mat;
  return linalg::hs_inner(xi, a * xi);
}

Complex hastings_state(const GibbsSystem& sys, const HermMatrix& v, const CMatrix& a,
                       const FlowSpec& flow) {
  return hastings_state(sys, theta_ode(sys, v, 1.0, flow).value, a);
}

Complex gibbs_expectation(const GibbsSystem& sys, const HermMatrix& v, const CMatrix& a) {
  return gns::perturbed_state(sys, v, a);
}

double g_delta_identity_residual(const GibbsSystem& sys, const HermMatrix& v, double s) {
  const Spectrum ms = sys.perturbed_spectrum(v * s);
  const CMatrix omega_s = linalg::exp_shifted(ms, 0.5);
  const CMatrix lhs = phi_spectral(sys, v, s).mat() * omega_s;

  // G(Delta_{Omega_s}) acts on the eigenbasis entries with Delta eigenvalue e^{k_i - k_j}.
  CMatrix x = linalg::to_eigenbasis(ms, v.mat() * omega_s);
  const Index n = ms.dim();
  for (Index i = 0; i < n; ++i)
    for (Index j = 0; j < n; ++j)
      x(i, j) *= kernel::G_eval(std::exp(ms.eigenvalues(i) - ms.eigenvalues(j)));
  return linalg::frob_norm(lhs - linalg::from_eigenbasis(ms, x));
}

Complex flow_derivative_fd(const GibbsSystem& sys, const HermMatrix& v, double s,
                           const CMatrix& a, double h) {
  if (!(h > 0.0)) throw InvalidArgument("flow_derivative_fd: h must be > 0");
  const auto plus = duhamel::araki_vector_exact(sys, v * (s + h));
  const auto minus = duhamel::araki_vector_exact(sys, v * (s - h));
  return (gns::state_eval(plus, a) - gns::state_eval(minus, a)) / (2.0 * h);
}

Complex flow_derivative_phi(const GibbsSystem& sys, const HermMatrix& v, double s,
                            const CMatrix& a) {
  const CMatrix omega_s = duhamel::araki_vector_exact(sys, v * s).mat;
  const CMatrix phi_omega = phi_spectral(sys, v, s).mat() * omega_s;
  return linalg::hs_inner(phi_omega, a * omega_s) + linalg::hs_inner(omega_s, a * phi_omega);
}

Complex flow_derivative_integral(const GibbsSystem& sys, const HermMatrix& v, double s,
                                 const CMatrix& a) {
  const Spectrum ms = sys.perturbed_spectrum(v * s);
  const CMatrix omega_s = linalg::exp_shifted(ms, 0.5);
  const CMatrix a_omega = a * omega_s;
  const GaussLegendre rule = unit_rule(ms.spread());
  Complex acc = 0.0;
  for (std::size_t k = 0; k < rule.nodes.size(); ++k) {
    // sigma^{sV}_{iu}(V) = e^{-u(K+sV)} V e^{u(K+sV)}
    const CMatrix flowed = linalg::conjugate_exp(ms, -rule.nodes[k], v.mat());
    acc += rule.weights[k] * linalg::hs_inner(omega_s, flowed * a_omega);
  }
  return acc;
}

double flow_equation_residual(const GibbsSystem& sys, const HermMatrix& v, double s,
                              const CMatrix& a, double h) {
  return std::abs(flow_derivative_fd(sys, v, s, a, h) - flow_derivative_phi(sys, v, s, a));
}

std::vector<double> stability_residual(const GibbsSystem& sys, const HermMatrix& v,
                                       const HermMatrix& w, const std::vector<double>& eps_list,
                                       const FlowSpec& flow) {
  const CMatrix& omega = sys.omega().mat;
  const CMatrix base = theta_ode(sys, v, 1.0, flow).value * omega;
  std::vector<double> out;
  out.reserve(eps_list.size());
  for (double eps : eps_list) {
    if (eps == 0.0) {
      out.push_back(0.0);
      continue;
    }
    const CMatrix moved = theta_ode(sys, v + w * eps, 1.0, flow).value * omega;
    out.push_back(linalg::frob_norm(moved - base));
  }
  return out;
}

std::vector<double> phi_u_continuity(const GibbsSystem& sys, const HermMatrix& v, double u,
                                     const std::vector<double>& deltas) {
  const CMatrix base = phi_spectral(sys, v, u).mat();
  std::vector<double> out;
  for (double d : deltas) out.push_back(linalg::op_norm(phi_spectral(sys, v, u + d).mat() - base));
  return out;
}

std::vector<double> phi_v_continuity(const GibbsSystem& sys, const HermMatrix& v,
                                     const HermMatrix& w, double u, const CMatrix& probe,
                                     const std::vector<double>& eps_list) {
  const CMatrix base = phi_spectral(sys, v, u).mat() * probe;
  std::vector<double> out;
  for (double eps : eps_list)
    out.push_back(linalg::frob_norm(phi_spectral(sys, v + w * eps, u).mat() * probe - base));
  return out;
}

double observed_order(double r1, double h1, double r2, double h2) {
  return std::log(r1 / r2) / std::log(h1 / h2);
}

}  // namespace kmsperturb::hastings
