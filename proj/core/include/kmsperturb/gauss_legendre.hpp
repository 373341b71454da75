#pragma once

#include <vector>

namespace kmsperturb {

/// Gauss-Legendre rule on [-1, 1].
struct GaussLegendre {
  std::vector<double> nodes;
  std::vector<double> weights;
};

/// n-point rule from Newton iteration on P_n; accurate to a few ulps for n <= 200.
GaussLegendre gauss_legendre(int n);

/// Nodes and weights mapped to [a, b] split into `panels` equal panels.
GaussLegendre composite_gauss_legendre(double a, double b, int panels, int n);

}  // namespace kmsperturb
