#pragma once

#include <complex>
#include <functional>

#include <Eigen/Dense>

namespace kmsperturb::linalg {

using Complex = std::complex<double>;
using CMatrix = Eigen::MatrixXcd;
using RVector = Eigen::VectorXd;
using Index = Eigen::Index;

/// Relative Hermiticity tolerance: max_ij |A_ij - conj(A_ji)| <= tol * max(1, ||A||).
inline constexpr double kHermitianTolerance = 1e-12;

/// A square complex matrix that passed the Hermiticity check.
///
/// Construction measures the asymmetry, throws NonHermitianError if it is
/// beyond kHermitianTolerance, and stores the symmetrized (A + A^dagger)/2.
class HermMatrix {
 public:
  explicit HermMatrix(const CMatrix& a);

  static HermMatrix zero(Index dim);
  static HermMatrix identity(Index dim);
  static HermMatrix diagonal(const RVector& d);

  const CMatrix& mat() const noexcept { return m_; }
  Index dim() const noexcept { return m_.rows(); }

  HermMatrix operator+(const HermMatrix& o) const;
  HermMatrix operator-(const HermMatrix& o) const;
  HermMatrix operator*(double s) const;

 private:
  struct Trusted {};
  HermMatrix(CMatrix a, Trusted) : m_(std::move(a)) {}
  CMatrix m_;
};

/// Eigenvalues in ascending order with their orthonormal column eigenvectors.
struct Spectrum {
  RVector eigenvalues;
  CMatrix frame;

  Index dim() const noexcept { return eigenvalues.size(); }
  double spread() const noexcept {
    return eigenvalues.size() == 0 ? 0.0
                                   : eigenvalues(eigenvalues.size() - 1) - eigenvalues(0);
  }
};

/// Measured asymmetry max_ij |A_ij - conj(A_ji)|.
double hermitian_asymmetry(const CMatrix& a);

Spectrum herm_eig(const HermMatrix& a);

using ComplexFunction = std::function<Complex(double)>;
using RealFunction = std::function<double(double)>;

/// frame * diag(g(lambda_i)) * frame^dagger.  Throws DomainError when g is
/// not finite on some eigenvalue.
CMatrix apply_fun(const Spectrum& s, const ComplexFunction& g);
CMatrix apply_fun(const Spectrum& s, const RealFunction& g);

/// Tr(X^dagger Y).
Complex hs_inner(const CMatrix& x, const CMatrix& y);

double op_norm(const CMatrix& a);
double frob_norm(const CMatrix& a);

/// Matrix exponential by Taylor scaling and squaring, independent of the
/// eigensolver.  Used as the second route for exponentials in checks.
CMatrix expm(const CMatrix& a);

/// Entry in the eigenbasis of `s`: frame^dagger * a * frame.
CMatrix to_eigenbasis(const Spectrum& s, const CMatrix& a);
CMatrix from_eigenbasis(const Spectrum& s, const CMatrix& a);

/// e^{w M} X e^{-w M} for M with spectrum `s`.  Works entrywise in the
/// eigenbasis with the factors e^{w (lambda_i - lambda_j)}, so no e^{w lambda}
/// is formed on its own.  Throws OverflowError when |Re w| * spread > 700.
CMatrix conjugate_exp(const Spectrum& s, Complex w, const CMatrix& x);

/// e^{w M} with the exponent shifted by `shift`: returns e^{w (M - shift)}.
CMatrix exp_shifted(const Spectrum& s, Complex w, double shift = 0.0);

void require_same_dim(const CMatrix& a, const CMatrix& b, const char* where);
void require_finite(const CMatrix& a, const char* where);

/// Relative Frobenius distance ||a - b||_F / max(1e-300, ||b||_F).
double relative_frob_error(const CMatrix& a, const CMatrix& b);

}  // namespace kmsperturb::linalg
