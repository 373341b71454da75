#pragma once

#include <cstdint>
#include <random>

#include "kmsperturb/linalg.hpp"

namespace kmsperturb {

/// Seedable portable generator.
///
/// The engine is std::mt19937_64, whose output sequence is fixed by the
/// standard.  Uniforms take the top 53 bits of one draw, (x >> 11) * 2^-53;
/// normals use the Box-Muller cosine branch on two uniforms (u1 mapped to
/// (0, 1]).  No std::*_distribution is involved, so results are bit-identical
/// across standard libraries.
class Rng {
 public:
  explicit Rng(std::uint64_t seed) : engine_(seed) {}

  double uniform();
  double normal();
  linalg::Complex complex_normal();

 private:
  std::mt19937_64 engine_;
};

/// i.i.d. complex Gaussian entries (real and imaginary parts N(0,1)).
linalg::CMatrix random_matrix(linalg::Index dim, Rng& rng);

/// (X + X^dagger)/2 of a complex Gaussian X, rescaled so op_norm == norm_scale.
linalg::HermMatrix random_hermitian(linalg::Index dim, double norm_scale, Rng& rng);

/// Haar-like unitary from the QR factorization of a complex Gaussian matrix.
linalg::CMatrix random_unitary(linalg::Index dim, Rng& rng);

}  // namespace kmsperturb
