#include "kmsperturb/duhamel.hpp"

#include <cmath>
#include <sstream>

#include "kmsperturb/errors.hpp"
#include "kmsperturb/gauss_legendre.hpp"

namespace kmsperturb::duhamel {

using linalg::Index;
using linalg::Spectrum;

namespace {

constexpr Complex kI{0.0, 1.0};

/// Frobenius norm of |X'_ij| e^{c |k_i - k_j|} with X' in the eigenbasis of `s`;
/// bounds ||e^{wM} X e^{-wM}|| for every |Re w| <= c.
double growth_bound(const Spectrum& s, const CMatrix& x, double c) {
  const CMatrix xp = linalg::to_eigenbasis(s, x);
  double acc = 0.0;
  for (Index i = 0; i < s.dim(); ++i)
    for (Index j = 0; j < s.dim(); ++j) {
      const double e = std::abs(xp(i, j)) * std::exp(c * std::abs(s.eigenvalues(i) - s.eigenvalues(j)));
      acc += e * e;
    }
  return std::sqrt(acc);
}

void require_order(int order, const char* where) {
  if (order < 0) {
    std::ostringstream os;
    os << where << ": series order must be non-negative, got " << order;
    throw InvalidArgument(os.str());
  }
}

std::vector<CocycleSeriesTerm> bounded_terms(const std::vector<CMatrix>& values, double rate) {
  std::vector<CocycleSeriesTerm> out;
  double bound = 1.0;
  for (std::size_t n = 0; n < values.size(); ++n) {
    if (n > 0) bound *= rate / static_cast<double>(n);
    out.push_back({static_cast<int>(n), values[n], bound});
  }
  return out;
}

/// Gauss-Legendre nodes on [0, 1] fine enough for integrands e^{u x} with
/// |x| <= spread.
GaussLegendre unit_rule(double spread) {
  const int panels = std::max(1, static_cast<int>(std::ceil(spread / 4.0)));
  return composite_gauss_legendre(0.0, 1.0, panels, 24);
}

}  // namespace

double interaction_norm_bound(const GibbsSystem& sys, const HermMatrix& q, Complex z) {
  const double qn = linalg::op_norm(q.mat());
  if (z.imag() == 0.0) return qn;
  const Spectrum& ks = sys.modular_spectrum();
  return std::min(growth_bound(ks, q.mat(), std::abs(z.imag())),
                  qn * std::exp(std::abs(z.imag()) * ks.spread()));
}

CMatrix cocycle_exact(const GibbsSystem& sys, const HermMatrix& q, Complex z) {
  linalg::require_same_dim(sys.rho().mat(), q.mat(), "cocycle_exact");
  const Spectrum pert = sys.perturbed_spectrum(q);
  const Spectrum& base = sys.modular_spectrum();
  const double shift = 0.25 * (pert.eigenvalues.minCoeff() + pert.eigenvalues.maxCoeff() +
                               base.eigenvalues.minCoeff() + base.eigenvalues.maxCoeff());
  return linalg::exp_shifted(pert, kI * z, shift) * linalg::exp_shifted(base, -kI * z, shift);
}

SeriesResult cocycle_series(const GibbsSystem& sys, const HermMatrix& q, Complex z, int order,
                            const ordered_exp::OdeSettings& settings) {
  require_order(order, "cocycle_series");
  linalg::require_same_dim(sys.rho().mat(), q.mat(), "cocycle_series");
  const Spectrum& ks = sys.modular_spectrum();
  const CMatrix& qm = q.mat();
  const ordered_exp::Generator gen = [&](double r) -> CMatrix {
    // iz * sigma_{rz}(Q), sigma_{w}(Q) = e^{iwK} Q e^{-iwK}
    return kI * z * linalg::conjugate_exp(ks, kI * r * z, qm);
  };
  const auto dyson =
      ordered_exp::dyson_terms(gen, sys.dim(), 1.0, order, ordered_exp::Side::right, settings);
  const double rate = std::abs(z) * interaction_norm_bound(sys, q, z);
  SeriesResult out;
  out.value = dyson.sum();
  out.tail_bound = ordered_exp::exp_tail(rate, order);
  out.integrator_error = dyson.error_estimate;
  out.terms = bounded_terms(dyson.terms, rate);
  return out;
}

double perturbed_flow_check(const GibbsSystem& sys, const HermMatrix& q, double t,
                            const CMatrix& a) {
  const CMatrix lhs = gns::modular_flow(sys, q, t, a);
  const CMatrix e = cocycle_exact(sys, q, t);
  const CMatrix rhs = e * gns::modular_flow(sys, HermMatrix::zero(sys.dim()), t, a) * e.adjoint();
  return linalg::op_norm(lhs - rhs);
}

HSVector araki_vector_exact(const GibbsSystem& sys, const HermMatrix& q) {
  linalg::require_same_dim(sys.rho().mat(), q.mat(), "araki_vector_exact");
  return {linalg::exp_shifted(sys.perturbed_spectrum(q), 0.5, 0.0)};
}

ArakiSeriesResult araki_vector_series(const GibbsSystem& sys, const HermMatrix& q, int order,
                                      const ordered_exp::OdeSettings& settings) {
  require_order(order, "araki_vector_series");
  linalg::require_same_dim(sys.rho().mat(), q.mat(), "araki_vector_series");
  const Spectrum& ks = sys.modular_spectrum();
  const CMatrix& qm = q.mat();
  const ordered_exp::Generator gen = [&](double s) -> CMatrix {
    return 0.5 * linalg::conjugate_exp(ks, -0.5 * s, qm);
  };
  const auto dyson =
      ordered_exp::dyson_terms(gen, sys.dim(), 1.0, order, ordered_exp::Side::left, settings);
  // sup_{s in [0,1]} ||e^{-sK/2} Q e^{sK/2}||
  const double sup = std::min(growth_bound(ks, qm, 0.5),
                              linalg::op_norm(qm) * std::exp(0.5 * ks.spread()));
  const double rate = 0.5 * sup;

  const CMatrix& omega = sys.omega().mat;
  std::vector<CMatrix> values;
  values.reserve(dyson.terms.size());
  for (const CMatrix& t : dyson.terms) values.push_back(omega * t);

  ArakiSeriesResult out;
  out.value = {omega * dyson.sum()};
  out.tail_bound = ordered_exp::exp_tail(rate, order);
  out.integrator_error = dyson.error_estimate;
  out.terms = bounded_terms(values, rate);
  return out;
}

double duhamel_factorization_check(const GibbsSystem& sys, const HermMatrix& v_phys,
                                   double beta) {
  if (!(beta > 0.0)) throw InvalidArgument("duhamel_factorization_check: beta must be > 0");
  const HermMatrix& h = sys.hamiltonian();
  const HermMatrix p = h + v_phys;
  const Spectrum ps = linalg::herm_eig(p);
  const Spectrum hs = linalg::herm_eig(h);
  // Everything is scaled by e^{beta c}; the factor cancels in the relative error.
  const double c = ps.eigenvalues(0);
  const Index n = h.dim();
  const CMatrix shifted = -beta * (p.mat() - c * CMatrix::Identity(n, n));
  const CMatrix lhs = linalg::expm(shifted);

  const CMatrix e = linalg::exp_shifted(ps, -0.5 * beta, c) * linalg::exp_shifted(hs, 0.5 * beta, c);
  const CMatrix gibbs = linalg::exp_shifted(hs, -beta, c);
  const CMatrix rhs = e * gibbs * e.adjoint();
  return linalg::relative_frob_error(rhs, lhs);
}

HSVector araki_derivative(const GibbsSystem& sys, const HermMatrix& v, double s) {
  const HermMatrix sv = v * s;
  const Spectrum ms = sys.perturbed_spectrum(sv);
  const CMatrix omega_s = linalg::exp_shifted(ms, 0.5, 0.0);
  const GaussLegendre rule = unit_rule(0.5 * ms.spread());
  CMatrix acc = CMatrix::Zero(sys.dim(), sys.dim());
  for (std::size_t k = 0; k < rule.nodes.size(); ++k) {
    // sigma^{sV}_{-iu/2}(V) = e^{(u/2)(K+sV)} V e^{-(u/2)(K+sV)}
    acc += rule.weights[k] * linalg::conjugate_exp(ms, 0.5 * rule.nodes[k], v.mat());
  }
  return {0.5 * acc * omega_s};
}

double araki_derivative_residual(const GibbsSystem& sys, const HermMatrix& v, double s,
                                 double h) {
  if (!(h > 0.0)) throw InvalidArgument("araki_derivative_residual: h must be > 0");
  const CMatrix plus = araki_vector_exact(sys, v * (s + h)).mat;
  const CMatrix minus = araki_vector_exact(sys, v * (s - h)).mat;
  const CMatrix fd = (plus - minus) / (2.0 * h);
  return linalg::frob_norm(fd - araki_derivative(sys, v, s).mat);
}

double cocycle_chain_rule_residual(const GibbsSystem& sys, const HermMatrix& q, double t,
                                   double s) {
  const CMatrix lhs = cocycle_exact(sys, q, t + s);
  const CMatrix rhs = cocycle_exact(sys, q, t) *
                      gns::modular_flow(sys, HermMatrix::zero(sys.dim()), t,
                                        cocycle_exact(sys, q, s));
  return linalg::op_norm(lhs - rhs);
}

}  // namespace kmsperturb::duhamel
