#pragma once

#include "kmsperturb/linalg.hpp"

// Finite-dimensional modular theory of a Gibbs state.
//
// The GNS space is the space of d x d matrices with <X, Y> = Tr(X^dagger Y);
// the algebra acts by left multiplication and the cyclic separating vector is
// Omega = rho^{1/2}.  With K = log rho:
//
//   J X                 = X^dagger
//   Delta X             = rho X rho^{-1}          (= e^{K} X e^{-K})
//   L X                 = K X - X K               (L = log Delta)
//   sigma_z(A)          = e^{izK} A e^{-izK}
//   e^{z(L+Q)} X        = e^{z(K+Q)} X e^{-zK}
//   J Q J X             = X Q                     (Q Hermitian)
//   Delta_{Omega_Q} X   = e^{K+Q} X e^{-(K+Q)}
//   Omega_Q             = e^{(L+Q)/2} Omega = e^{(K+Q)/2}
//
// Superoperators are never formed as d^2 x d^2 matrices.

namespace kmsperturb::gns {

using linalg::CMatrix;
using linalg::Complex;
using linalg::HermMatrix;
using linalg::Index;
using linalg::Spectrum;

/// An element of the GNS space.
struct HSVector {
  CMatrix mat;
};

/// H and beta together with the derived modular data.  Immutable.
class GibbsSystem {
 public:
  const HermMatrix& hamiltonian() const noexcept { return h_; }
  double beta() const noexcept { return beta_; }
  /// Tr e^{-beta H}; may be +inf when only log_partition is representable.
  double partition_function() const noexcept { return z_; }
  double log_partition() const noexcept { return log_z_; }
  const HermMatrix& rho() const noexcept { return rho_; }
  /// K = log rho.
  const HermMatrix& modular_generator() const noexcept { return k_; }
  const HSVector& omega() const noexcept { return omega_; }
  /// Spectrum of K (the frame is shared with H).
  const Spectrum& modular_spectrum() const noexcept { return k_spec_; }
  Index dim() const noexcept { return h_.dim(); }

  /// Spectrum of K + Q; reuses the cached spectrum of K when Q is zero.
  Spectrum perturbed_spectrum(const HermMatrix& q) const;

 private:
  friend GibbsSystem build_gibbs(const HermMatrix& h, double beta);
  GibbsSystem(HermMatrix h, double beta, double z, double log_z, HermMatrix rho,
              HermMatrix k, HSVector omega, Spectrum k_spec);

  HermMatrix h_;
  double beta_;
  double z_;
  double log_z_;
  HermMatrix rho_;
  HermMatrix k_;
  HSVector omega_;
  Spectrum k_spec_;
};

/// rho = e^{-beta H} / Tr e^{-beta H} computed in log domain.
/// Throws InvalidArgument for beta <= 0 and OverflowError when
/// beta * spread(H) > 700 (rho would lose positive definiteness).
GibbsSystem build_gibbs(const HermMatrix& h, double beta);

/// e^{iz(K+Q)} A e^{-iz(K+Q)}; Q = 0 is the unperturbed modular flow.
CMatrix modular_flow(const GibbsSystem& sys, const HermMatrix& q, Complex z, const CMatrix& a);

/// Tr(psi^dagger A psi).
Complex state_eval(const HSVector& psi, const CMatrix& a);

/// e^{z(K+Q)} X e^{-z(K+Q)}, i.e. Delta_{Omega_Q}^z X.
HSVector rel_modular_apply(const GibbsSystem& sys, const HermMatrix& q, Complex z,
                           const HSVector& x);

/// Normalized KMS residual at inverse temperature -1 for sigma^Q:
/// |w(A sigma^Q_{-i}(B)) - w(B A)| / max(1, |w(B A)|) with w the normalized
/// perturbed state Tr(e^{K+Q} .)/Tr e^{K+Q}.
double kms_residual(const GibbsSystem& sys, const HermMatrix& q, const CMatrix& a,
                    const CMatrix& b);

// Dictionary maps, each checked against its defining property in the tests.

HSVector modular_conjugation(const HSVector& x);
HSVector modular_operator_apply(const GibbsSystem& sys, const HSVector& x);
HSVector liouvillean_apply(const GibbsSystem& sys, const HSVector& x);
/// (L + Q - JQJ) X = (K+Q) X - X (K+Q).
HSVector relative_liouvillean_apply(const GibbsSystem& sys, const HermMatrix& q,
                                    const HSVector& x);
/// e^{z(L+Q)} X = e^{z(K+Q)} X e^{-zK}.
HSVector perturbed_liouvillean_exp(const GibbsSystem& sys, const HermMatrix& q, Complex z,
                                   const HSVector& x);
/// J Q J X = X Q.
HSVector commutant_apply(const HermMatrix& q, const HSVector& x);

/// Unnormalized perturbed state Tr(e^{K+Q} A) and its normalized version.
Complex perturbed_state(const GibbsSystem& sys, const HermMatrix& q, const CMatrix& a);
Complex normalized_perturbed_state(const GibbsSystem& sys, const HermMatrix& q,
                                   const CMatrix& a);

/// Smallest singular value of Omega_Q = e^{(K+Q)/2}; positive iff Omega_Q is
/// cyclic and separating.
double min_singular_value(const CMatrix& a);

}  // namespace kmsperturb::gns
