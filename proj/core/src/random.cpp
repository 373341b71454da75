#include "kmsperturb/random.hpp"

#include <cmath>
#include <numbers>

namespace kmsperturb {

using linalg::CMatrix;
using linalg::Complex;
using linalg::HermMatrix;
using linalg::Index;

double Rng::uniform() {
  return static_cast<double>(engine_() >> 11) * 0x1.0p-53;
}

double Rng::normal() {
  const double u1 = 1.0 - uniform();  // (0, 1]
  const double u2 = uniform();
  return std::sqrt(-2.0 * std::log(u1)) * std::cos(2.0 * std::numbers::pi * u2);
}

Complex Rng::complex_normal() {
  const double re = normal();
  const double im = normal();
  return {re, im};
}

CMatrix random_matrix(Index dim, Rng& rng) {
  CMatrix m(dim, dim);
  // Row-major fill order is part of the documented reproducibility contract.
  for (Index i = 0; i < dim; ++i)
    for (Index j = 0; j < dim; ++j) m(i, j) = rng.complex_normal();
  return m;
}

HermMatrix random_hermitian(Index dim, double norm_scale, Rng& rng) {
  const CMatrix x = random_matrix(dim, rng);
  CMatrix h = 0.5 * (x + x.adjoint());
  const double n = linalg::op_norm(h);
  if (n > 0.0) h *= norm_scale / n;
  return HermMatrix(h);
}

CMatrix random_unitary(Index dim, Rng& rng) {
  const CMatrix x = random_matrix(dim, rng);
  Eigen::HouseholderQR<CMatrix> qr(x);
  CMatrix q = qr.householderQ() * CMatrix::Identity(dim, dim);
  // Fix column phases with the diagonal of R so the distribution is Haar.
  const CMatrix r = qr.matrixQR().triangularView<Eigen::Upper>();
  for (Index j = 0; j < dim; ++j) {
    const double a = std::abs(r(j, j));
    if (a > 0.0) q.col(j) *= r(j, j) / a;
  }
  return q;
}

}  // namespace kmsperturb
