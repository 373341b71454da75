#include "kmsperturb/gns.hpp"

#include <cmath>
#include <sstream>

#include "kmsperturb/errors.hpp"

namespace kmsperturb::gns {

using linalg::RVector;

namespace {

constexpr double kMaxExponent = 700.0;

/// Weights e^{k_i - max k} / sum_j e^{k_j - max k}.
RVector softmax(const RVector& k) {
  RVector w = (k.array() - k.maxCoeff()).exp();
  return w / w.sum();
}

}  // namespace

GibbsSystem::GibbsSystem(HermMatrix h, double beta, double z, double log_z, HermMatrix rho,
                         HermMatrix k, HSVector omega, Spectrum k_spec)
    : h_(std::move(h)),
      beta_(beta),
      z_(z),
      log_z_(log_z),
      rho_(std::move(rho)),
      k_(std::move(k)),
      omega_(std::move(omega)),
      k_spec_(std::move(k_spec)) {}

Spectrum GibbsSystem::perturbed_spectrum(const HermMatrix& q) const {
  linalg::require_same_dim(k_.mat(), q.mat(), "perturbed_spectrum");
  if (q.mat().isZero(0.0)) return k_spec_;
  return linalg::herm_eig(k_ + q);
}

GibbsSystem build_gibbs(const HermMatrix& h, double beta) {
  if (!(beta > 0.0) || !std::isfinite(beta)) {
    std::ostringstream os;
    os << "build_gibbs: beta must be positive and finite, got " << beta;
    throw InvalidArgument(os.str());
  }
  const Spectrum hs = linalg::herm_eig(h);
  const double exponent = beta * hs.spread();
  if (exponent > kMaxExponent) {
    std::ostringstream os;
    os << "build_gibbs: beta * spread(H) = " << exponent
       << " exceeds 700; rho is not representable as positive definite";
    throw OverflowError(os.str(), exponent);
  }

  const Index n = hs.dim();
  // -beta*lambda is descending when lambda is ascending; reverse to keep the
  // spectrum of K ascending.
  Spectrum ks;
  ks.eigenvalues.resize(n);
  ks.frame.resize(n, n);
  for (Index i = 0; i < n; ++i) {
    ks.eigenvalues(i) = -beta * hs.eigenvalues(n - 1 - i);
    ks.frame.col(i) = hs.frame.col(n - 1 - i);
  }
  const double top = ks.eigenvalues.maxCoeff();
  const double log_z = top + std::log((ks.eigenvalues.array() - top).exp().sum());
  ks.eigenvalues.array() -= log_z;

  const linalg::RealFunction exp_fn = [](double x) { return std::exp(x); };
  const linalg::RealFunction id_fn = [](double x) { return x; };
  const linalg::RealFunction sqrt_fn = [](double x) { return std::exp(0.5 * x); };
  HermMatrix rho(linalg::apply_fun(ks, exp_fn));
  HermMatrix k(linalg::apply_fun(ks, id_fn));
  HSVector omega{linalg::apply_fun(ks, sqrt_fn)};
  return GibbsSystem(h, beta, std::exp(log_z), log_z, std::move(rho), std::move(k),
                     std::move(omega), std::move(ks));
}

CMatrix modular_flow(const GibbsSystem& sys, const HermMatrix& q, Complex z, const CMatrix& a) {
  linalg::require_same_dim(sys.rho().mat(), a, "modular_flow");
  return linalg::conjugate_exp(sys.perturbed_spectrum(q), Complex(0.0, 1.0) * z, a);
}

Complex state_eval(const HSVector& psi, const CMatrix& a) {
  linalg::require_same_dim(psi.mat, a, "state_eval");
  return linalg::hs_inner(psi.mat, a * psi.mat);
}

HSVector rel_modular_apply(const GibbsSystem& sys, const HermMatrix& q, Complex z,
                           const HSVector& x) {
  linalg::require_same_dim(sys.rho().mat(), x.mat, "rel_modular_apply");
  return {linalg::conjugate_exp(sys.perturbed_spectrum(q), z, x.mat)};
}

double kms_residual(const GibbsSystem& sys, const HermMatrix& q, const CMatrix& a,
                    const CMatrix& b) {
  linalg::require_same_dim(sys.rho().mat(), a, "kms_residual");
  linalg::require_same_dim(sys.rho().mat(), b, "kms_residual");
  const Spectrum spec = sys.perturbed_spectrum(q);
  const RVector w = softmax(spec.eigenvalues);
  const CMatrix ap = linalg::to_eigenbasis(spec, a);
  const CMatrix bp = linalg::to_eigenbasis(spec, b);
  // sigma^Q_{-i}(B) = e^{K+Q} B e^{-(K+Q)}, entrywise in the eigenbasis.
  CMatrix shifted = bp;
  const Index n = spec.dim();
  const double exponent = spec.spread();
  if (exponent > kMaxExponent) throw OverflowError("kms_residual: spread overflows", exponent);
  for (Index i = 0; i < n; ++i)
    for (Index j = 0; j < n; ++j)
      shifted(i, j) *= std::exp(spec.eigenvalues(i) - spec.eigenvalues(j));
  const CMatrix lhs_op = ap * shifted;
  const CMatrix rhs_op = bp * ap;
  Complex lhs = 0.0, rhs = 0.0;
  for (Index i = 0; i < n; ++i) {
    lhs += w(i) * lhs_op(i, i);
    rhs += w(i) * rhs_op(i, i);
  }
  return std::abs(lhs - rhs) / std::max(1.0, std::abs(rhs));
}

HSVector modular_conjugation(const HSVector& x) { return {x.mat.adjoint()}; }

HSVector modular_operator_apply(const GibbsSystem& sys, const HSVector& x) {
  return rel_modular_apply(sys, HermMatrix::zero(sys.dim()), 1.0, x);
}

HSVector liouvillean_apply(const GibbsSystem& sys, const HSVector& x) {
  const CMatrix& k = sys.modular_generator().mat();
  return {k * x.mat - x.mat * k};
}

HSVector relative_liouvillean_apply(const GibbsSystem& sys, const HermMatrix& q,
                                    const HSVector& x) {
  const CMatrix m = sys.modular_generator().mat() + q.mat();
  return {m * x.mat - x.mat * m};
}

HSVector perturbed_liouvillean_exp(const GibbsSystem& sys, const HermMatrix& q, Complex z,
                                   const HSVector& x) {
  linalg::require_same_dim(sys.rho().mat(), x.mat, "perturbed_liouvillean_exp");
  const Spectrum pert = sys.perturbed_spectrum(q);
  const Spectrum& base = sys.modular_spectrum();
  // A common shift cancels between the two factors.
  const double shift = 0.5 * (pert.eigenvalues.maxCoeff() + base.eigenvalues.maxCoeff());
  return {linalg::exp_shifted(pert, z, shift) * x.mat * linalg::exp_shifted(base, -z, shift)};
}

HSVector commutant_apply(const HermMatrix& q, const HSVector& x) { return {x.mat * q.mat()}; }

Complex perturbed_state(const GibbsSystem& sys, const HermMatrix& q, const CMatrix& a) {
  linalg::require_same_dim(sys.rho().mat(), a, "perturbed_state");
  const Spectrum spec = sys.perturbed_spectrum(q);
  const double top = spec.eigenvalues.maxCoeff();
  if (top > kMaxExponent) throw OverflowError("perturbed_state: e^{K+Q} overflows", top);
  const CMatrix ap = linalg::to_eigenbasis(spec, a);
  Complex acc = 0.0;
  for (Index i = 0; i < spec.dim(); ++i) acc += std::exp(spec.eigenvalues(i)) * ap(i, i);
  return acc;
}

Complex normalized_perturbed_state(const GibbsSystem& sys, const HermMatrix& q,
                                   const CMatrix& a) {
  linalg::require_same_dim(sys.rho().mat(), a, "normalized_perturbed_state");
  const Spectrum spec = sys.perturbed_spectrum(q);
  const RVector w = softmax(spec.eigenvalues);
  const CMatrix ap = linalg::to_eigenbasis(spec, a);
  Complex acc = 0.0;
  for (Index i = 0; i < spec.dim(); ++i) acc += w(i) * ap(i, i);
  return acc;
}

double min_singular_value(const CMatrix& a) {
  Eigen::JacobiSVD<CMatrix> svd(a);
  const auto& s = svd.singularValues();
  return s(s.size() - 1);
}

}  // namespace kmsperturb::gns
