#pragma once

#include <vector>

#include "kmsperturb/gns.hpp"
#include "kmsperturb/ordered_exp.hpp"

// The classical perturbation expansion: cocycles, perturbed dynamics and the
// perturbed vector Omega_Q, each available in closed form and as a truncated
// ordered-simplex series.

namespace kmsperturb::duhamel {

using gns::GibbsSystem;
using gns::HSVector;
using linalg::CMatrix;
using linalg::Complex;
using linalg::HermMatrix;

/// One order of a truncated series with its a priori norm bound.
struct CocycleSeriesTerm {
  int order = 0;
  CMatrix value;
  double bound = 0.0;
};

struct SeriesResult {
  CMatrix value;
  /// Bound on the norm of the omitted orders.
  double tail_bound = 0.0;
  /// RK4 step-halving estimate of the recursion itself.
  double integrator_error = 0.0;
  std::vector<CocycleSeriesTerm> terms;
};

/// E_Q(z) = e^{iz(K+Q)} e^{-izK}.
CMatrix cocycle_exact(const GibbsSystem& sys, const HermMatrix& q, Complex z);

/// sum_{n<=N} (iz)^n int_{0<=s_n<=...<=s_1<=1} sigma_{s_n z}(Q)...sigma_{s_1 z}(Q),
/// via the interaction-picture recursion Y' = iz Y sigma_{rz}(Q) on r in [0,1].
SeriesResult cocycle_series(const GibbsSystem& sys, const HermMatrix& q, Complex z, int order,
                            const ordered_exp::OdeSettings& settings = {});

/// op_norm(sigma^Q_t(A) - E_Q(t) sigma_t(A) E_Q(t)^dagger) for real t.
double perturbed_flow_check(const GibbsSystem& sys, const HermMatrix& q, double t,
                            const CMatrix& a);

/// Omega_Q = e^{(K+Q)/2}.
HSVector araki_vector_exact(const GibbsSystem& sys, const HermMatrix& q);

/// Truncated expansion of Omega_Q: Omega_Q = e^{K/2} G(1) with
/// G' = (1/2) e^{-sK/2} Q e^{sK/2} G, G(0) = I.
struct ArakiSeriesResult {
  HSVector value;
  double tail_bound = 0.0;
  double integrator_error = 0.0;
  std::vector<CocycleSeriesTerm> terms;
};
ArakiSeriesResult araki_vector_series(const GibbsSystem& sys, const HermMatrix& q, int order,
                                      const ordered_exp::OdeSettings& settings = {});

/// Relative Frobenius error between e^{-beta(H+V)} and E e^{-beta H} E^dagger,
/// E = e^{-beta(H+V)/2} e^{beta H/2}.  The left side goes through the Taylor
/// exponential, the right side through eigendecompositions.
double duhamel_factorization_check(const GibbsSystem& sys, const HermMatrix& v_phys,
                                   double beta);

/// || (Omega_{s+h} - Omega_{s-h}) / 2h - (1/2) int_0^1 sigma^{sV}_{-iu/2}(V) Omega_s du ||_F
double araki_derivative_residual(const GibbsSystem& sys, const HermMatrix& v, double s,
                                 double h);

/// (1/2) int_0^1 sigma^{sV}_{-iu/2}(V) Omega_s du by Gauss-Legendre in u.
HSVector araki_derivative(const GibbsSystem& sys, const HermMatrix& v, double s);

/// E_Q(t+s) - E_Q(t) sigma_t(E_Q(s)) in operator norm (real t, s).
double cocycle_chain_rule_residual(const GibbsSystem& sys, const HermMatrix& q, double t,
                                   double s);

/// Largest a priori bound for sup_{r in [0,1]} ||sigma_{rz}(Q)||.
double interaction_norm_bound(const GibbsSystem& sys, const HermMatrix& q, Complex z);

}  // namespace kmsperturb::duhamel
