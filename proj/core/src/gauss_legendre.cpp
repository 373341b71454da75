#include "kmsperturb/gauss_legendre.hpp"

#include <cmath>
#include <numbers>

#include "kmsperturb/errors.hpp"

namespace kmsperturb {

GaussLegendre gauss_legendre(int n) {
  if (n < 1) throw InvalidArgument("gauss_legendre: n must be >= 1");
  GaussLegendre rule;
  rule.nodes.resize(n);
  rule.weights.resize(n);
  for (int i = 0; i < (n + 1) / 2; ++i) {
    // Tricomi initial guess, then Newton on P_n.
    double x = std::cos(std::numbers::pi * (i + 0.75) / (n + 0.5));
    double dp = 0.0;
    for (int iter = 0; iter < 100; ++iter) {
      double p0 = 1.0, p1 = x;
      for (int k = 2; k <= n; ++k) {
        const double p2 = ((2.0 * k - 1.0) * x * p1 - (k - 1.0) * p0) / k;
        p0 = p1;
        p1 = p2;
      }
      if (n == 1) p0 = 1.0;
      dp = n * (x * p1 - p0) / (x * x - 1.0);
      const double dx = p1 / dp;
      x -= dx;
      if (std::abs(dx) < 1e-16) break;
    }
    double p0 = 1.0, p1 = x;
    for (int k = 2; k <= n; ++k) {
      const double p2 = ((2.0 * k - 1.0) * x * p1 - (k - 1.0) * p0) / k;
      p0 = p1;
      p1 = p2;
    }
    dp = n * (x * p1 - p0) / (x * x - 1.0);
    const double w = 2.0 / ((1.0 - x * x) * dp * dp);
    rule.nodes[i] = -x;
    rule.nodes[n - 1 - i] = x;
    rule.weights[i] = w;
    rule.weights[n - 1 - i] = w;
  }
  if (n % 2 == 1) rule.nodes[n / 2] = 0.0;
  return rule;
}

GaussLegendre composite_gauss_legendre(double a, double b, int panels, int n) {
  if (panels < 1) throw InvalidArgument("composite_gauss_legendre: panels must be >= 1");
  const GaussLegendre base = gauss_legendre(n);
  GaussLegendre out;
  out.nodes.reserve(static_cast<std::size_t>(panels) * n);
  out.weights.reserve(out.nodes.capacity());
  const double width = (b - a) / panels;
  for (int p = 0; p < panels; ++p) {
    const double lo = a + width * p;
    const double mid = lo + 0.5 * width;
    for (int i = 0; i < n; ++i) {
      out.nodes.push_back(mid + 0.5 * width * base.nodes[i]);
      out.weights.push_back(0.5 * width * base.weights[i]);
    }
  }
  return out;
}

}  // namespace kmsperturb
