#include "kmsperturb/linalg.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <sstream>

#include "kmsperturb/errors.hpp"

namespace kmsperturb::linalg {

namespace {

constexpr double kMaxExponent = 700.0;

void require_square(const CMatrix& a, const char* where) {
  if (a.rows() != a.cols() || a.rows() < 1) {
    std::ostringstream os;
    os << where << ": expected a non-empty square matrix, got " << a.rows() << "x"
       << a.cols();
    throw DimensionError(os.str());
  }
}

}  // namespace

double hermitian_asymmetry(const CMatrix& a) {
  double worst = 0.0;
  for (Index i = 0; i < a.rows(); ++i)
    for (Index j = i; j < a.cols(); ++j)
      worst = std::max(worst, std::abs(a(i, j) - std::conj(a(j, i))));
  return worst;
}

HermMatrix::HermMatrix(const CMatrix& a) {
  require_square(a, "HermMatrix");
  require_finite(a, "HermMatrix");
  const double asym = hermitian_asymmetry(a);
  const double scale = std::max(1.0, op_norm(a));
  if (asym > kHermitianTolerance * scale) {
    std::ostringstream os;
    os << "matrix is not Hermitian: asymmetry " << asym << " exceeds "
       << kHermitianTolerance * scale;
    throw NonHermitianError(os.str(), asym);
  }
  m_ = 0.5 * (a + a.adjoint());
}

HermMatrix HermMatrix::zero(Index dim) {
  return HermMatrix(CMatrix::Zero(dim, dim), Trusted{});
}

HermMatrix HermMatrix::identity(Index dim) {
  return HermMatrix(CMatrix::Identity(dim, dim), Trusted{});
}

HermMatrix HermMatrix::diagonal(const RVector& d) {
  return HermMatrix(d.cast<Complex>().asDiagonal().toDenseMatrix(), Trusted{});
}

HermMatrix HermMatrix::operator+(const HermMatrix& o) const {
  require_same_dim(m_, o.m_, "HermMatrix::operator+");
  return HermMatrix(m_ + o.m_, Trusted{});
}

HermMatrix HermMatrix::operator-(const HermMatrix& o) const {
  require_same_dim(m_, o.m_, "HermMatrix::operator-");
  return HermMatrix(m_ - o.m_, Trusted{});
}

HermMatrix HermMatrix::operator*(double s) const { return HermMatrix(m_ * s, Trusted{}); }

Spectrum herm_eig(const HermMatrix& a) {
  Eigen::SelfAdjointEigenSolver<CMatrix> solver(a.mat());
  if (solver.info() != Eigen::Success)
    throw Error("herm_eig: eigensolver failed to converge");
  // Eigen returns ascending eigenvalues already.
  return Spectrum{solver.eigenvalues(), solver.eigenvectors()};
}

CMatrix apply_fun(const Spectrum& s, const ComplexFunction& g) {
  const Index n = s.dim();
  Eigen::VectorXcd values(n);
  for (Index i = 0; i < n; ++i) {
    const Complex v = g(s.eigenvalues(i));
    if (!std::isfinite(v.real()) || !std::isfinite(v.imag())) {
      std::ostringstream os;
      os << "apply_fun: function is not finite at eigenvalue " << s.eigenvalues(i);
      throw DomainError(os.str(), s.eigenvalues(i));
    }
    values(i) = v;
  }
  return s.frame * values.asDiagonal() * s.frame.adjoint();
}

CMatrix apply_fun(const Spectrum& s, const RealFunction& g) {
  CMatrix out = apply_fun(s, ComplexFunction([&g](double x) { return Complex(g(x), 0.0); }));
  return 0.5 * (out + out.adjoint());
}

Complex hs_inner(const CMatrix& x, const CMatrix& y) {
  require_same_dim(x, y, "hs_inner");
  // Tr(X^dagger Y) = sum_ij conj(X_ij) Y_ij
  return (x.conjugate().cwiseProduct(y)).sum();
}

double op_norm(const CMatrix& a) {
  if (a.size() == 0) return 0.0;
  // Largest singular value; the top eigenvalue of A^dagger A carries full
  // relative precision.
  const CMatrix g = a.adjoint() * a;
  Eigen::SelfAdjointEigenSolver<CMatrix> solver(g, Eigen::EigenvaluesOnly);
  return std::sqrt(std::max(0.0, solver.eigenvalues().maxCoeff()));
}

double frob_norm(const CMatrix& a) { return a.norm(); }

CMatrix expm(const CMatrix& a) {
  require_square(a, "expm");
  const double norm1 = a.cwiseAbs().colwise().sum().maxCoeff();
  int squarings = 0;
  if (norm1 > 0.25) squarings = static_cast<int>(std::ceil(std::log2(norm1 / 0.25)));
  const CMatrix b = a / std::ldexp(1.0, squarings);

  const Index n = a.rows();
  CMatrix result = CMatrix::Identity(n, n);
  CMatrix term = CMatrix::Identity(n, n);
  for (int k = 1; k <= 30; ++k) {
    term = term * b / static_cast<double>(k);
    result += term;
    if (term.cwiseAbs().maxCoeff() <= 1e-18 * result.cwiseAbs().maxCoeff()) break;
  }
  for (int i = 0; i < squarings; ++i) result = result * result;
  require_finite(result, "expm");
  return result;
}

CMatrix to_eigenbasis(const Spectrum& s, const CMatrix& a) {
  return s.frame.adjoint() * a * s.frame;
}

CMatrix from_eigenbasis(const Spectrum& s, const CMatrix& a) {
  return s.frame * a * s.frame.adjoint();
}

CMatrix conjugate_exp(const Spectrum& s, Complex w, const CMatrix& x) {
  require_same_dim(s.frame, x, "conjugate_exp");
  const double exponent = std::abs(w.real()) * s.spread();
  if (exponent > kMaxExponent) {
    std::ostringstream os;
    os << "conjugate_exp: exponent " << exponent << " overflows";
    throw OverflowError(os.str(), exponent);
  }
  CMatrix y = to_eigenbasis(s, x);
  const Index n = s.dim();
  for (Index i = 0; i < n; ++i)
    for (Index j = 0; j < n; ++j)
      y(i, j) *= std::exp(w * (s.eigenvalues(i) - s.eigenvalues(j)));
  return from_eigenbasis(s, y);
}

CMatrix exp_shifted(const Spectrum& s, Complex w, double shift) {
  double worst = -std::numeric_limits<double>::infinity();
  for (Index i = 0; i < s.dim(); ++i)
    worst = std::max(worst, (w * (s.eigenvalues(i) - shift)).real());
  if (worst > kMaxExponent) {
    std::ostringstream os;
    os << "exp_shifted: exponent " << worst << " overflows";
    throw OverflowError(os.str(), worst);
  }
  return apply_fun(s, ComplexFunction([&](double x) { return std::exp(w * (x - shift)); }));
}

void require_same_dim(const CMatrix& a, const CMatrix& b, const char* where) {
  if (a.rows() != b.rows() || a.cols() != b.cols()) {
    std::ostringstream os;
    os << where << ": dimension mismatch " << a.rows() << "x" << a.cols() << " vs "
       << b.rows() << "x" << b.cols();
    throw DimensionError(os.str());
  }
}

void require_finite(const CMatrix& a, const char* where) {
  if (!a.allFinite()) throw Error(std::string(where) + ": matrix has non-finite entries");
}

double relative_frob_error(const CMatrix& a, const CMatrix& b) {
  const double denom = b.norm();
  return (a - b).norm() / (denom > 0.0 ? denom : 1.0);
}

}  // namespace kmsperturb::linalg
