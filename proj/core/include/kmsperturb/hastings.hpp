#pragma once

#include <vector>

#include "kmsperturb/gns.hpp"
#include "kmsperturb/kernel.hpp"
#include "kmsperturb/ordered_exp.hpp"

// The bounded representation of the perturbed state:
//
//   Phi(V; u)  = int k(t) sigma^{uV}_t(V) dt
//   theta(V;s) = ordered exponential of Phi, theta' = Phi(V; s) theta, theta(0) = I
//   omega_V(A) = <theta(V;1) Omega, A theta(V;1) Omega> = Tr(e^{K+V} A)
//
// with k the normalized kernel from kernel.hpp.

namespace kmsperturb::hastings {

using gns::GibbsSystem;
using gns::HSVector;
using linalg::CMatrix;
using linalg::Complex;
using linalg::HermMatrix;

/// Discretization of the theta flow.
struct FlowSpec {
  double tolerance = 1e-9;
  double max_step = 0.125;
  int series_order = 14;

  void validate() const;
  ordered_exp::OdeSettings ode() const;
};

/// Phi before Hermitian projection; its asymmetry measures round-off.
CMatrix phi_spectral_matrix(const GibbsSystem& sys, const HermMatrix& v, double u);

/// Phi(V;u) in the eigenbasis of K + uV: Phi'_ij = V'_ij F(kappa_i - kappa_j).
HermMatrix phi_spectral(const GibbsSystem& sys, const HermMatrix& v, double u);

struct PhiQuadrature {
  HermMatrix value;
  /// Fine/coarse rule distance in Frobenius norm.
  double error_estimate = 0.0;
  /// spec.tolerance + tail_mass(T) * ||V||: bound on the distance to phi_spectral.
  double budget = 0.0;
};

/// Quadrature of t -> k(t) sigma^{uV}_t(V) over |t| <= T.  Throws
/// QuadratureBudgetError when the error estimate exceeds spec.tolerance.
PhiQuadrature phi_quadrature(const GibbsSystem& sys, const HermMatrix& v, double u,
                             const kernel::QuadratureSpec& spec);

struct ThetaResult {
  CMatrix value;
  double error_estimate = 0.0;
  long steps = 0;
};

/// Solves theta' = Phi(V; .) theta on [0, s] with Phi from phi_spectral.
ThetaResult theta_ode(const GibbsSystem& sys, const HermMatrix& v, double s,
                      const FlowSpec& flow);

struct ThetaSeries {
  CMatrix value;
  double tail_bound = 0.0;
  double integrator_error = 0.0;
  std::vector<CMatrix> terms;
};

/// Truncated ordered series sum_{n<=N} int_{s>=u_1>=...>=u_n>=0} Phi(u_1)...Phi(u_n),
/// tail_bound = sum_{n>N} (|s| ||V|| / 2)^n / n!.
ThetaSeries theta_dyson(const GibbsSystem& sys, const HermMatrix& v, double s, int order,
                        const ordered_exp::OdeSettings& settings = {});

/// <theta Omega, A theta Omega> with theta = theta_ode(sys, V, 1, flow).
Complex hastings_state(const GibbsSystem& sys, const HermMatrix& v, const CMatrix& a,
                       const FlowSpec& flow);

/// Same with a precomputed theta(V;1).
Complex hastings_state(const GibbsSystem& sys, const CMatrix& theta, const CMatrix& a);

/// Reference value Tr(e^{K+V} A) by exact diagonalization of K + V.
Complex gibbs_expectation(const GibbsSystem& sys, const HermMatrix& v, const CMatrix& a);

/// || Phi(V;s) Omega_s - G(Delta_{Omega_s}) (V Omega_s) ||_F.
double g_delta_identity_residual(const GibbsSystem& sys, const HermMatrix& v, double s);

/// d/ds omega_s(A) by central differences of width h.
Complex flow_derivative_fd(const GibbsSystem& sys, const HermMatrix& v, double s,
                           const CMatrix& a, double h);
/// <Phi(V;s) Omega_s, A Omega_s> + <Omega_s, A Phi(V;s) Omega_s>.
Complex flow_derivative_phi(const GibbsSystem& sys, const HermMatrix& v, double s,
                            const CMatrix& a);
/// int_0^1 <Omega_s, sigma^{sV}_{iu}(V) A Omega_s> du by Gauss-Legendre.
Complex flow_derivative_integral(const GibbsSystem& sys, const HermMatrix& v, double s,
                                 const CMatrix& a);

/// |flow_derivative_fd - flow_derivative_phi|.
double flow_equation_residual(const GibbsSystem& sys, const HermMatrix& v, double s,
                              const CMatrix& a, double h);

/// ||theta(V + eps W; 1) Omega - theta(V; 1) Omega||_F for each eps.
std::vector<double> stability_residual(const GibbsSystem& sys, const HermMatrix& v,
                                       const HermMatrix& w, const std::vector<double>& eps_list,
                                       const FlowSpec& flow);

/// ||Phi(V; u + delta) - Phi(V; u)|| for each delta.
std::vector<double> phi_u_continuity(const GibbsSystem& sys, const HermMatrix& v, double u,
                                     const std::vector<double>& deltas);

/// ||(Phi(V + eps W; u) - Phi(V; u)) X||_F for each eps.
std::vector<double> phi_v_continuity(const GibbsSystem& sys, const HermMatrix& v,
                                     const HermMatrix& w, double u, const CMatrix& probe,
                                     const std::vector<double>& eps_list);

/// Convergence order log(r1/r2)/log(h1/h2) from residuals at two step sizes.
double observed_order(double r1, double h1, double r2, double h2);

}  // namespace kmsperturb::hastings
