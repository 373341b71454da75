#pragma once

#include <functional>
#include <vector>

#include "kmsperturb/linalg.hpp"

// Time-ordered exponentials of a matrix-valued generator G(r), r in [0, length]:
//
//   Side::left   Y'(r) = G(r) Y(r)     Y = sum_n int_{r_1 >= ... >= r_n} G(r_1)...G(r_n)
//   Side::right  Y'(r) = Y(r) G(r)     Y = sum_n int_{r_1 <= ... <= r_n} G(r_1)...G(r_n)
//
// Both the full flow and the order-by-order Dyson terms use classical RK4 on a
// uniform grid, halving the step until two successive solutions differ by less
// than the tolerance in Frobenius norm; the returned value is the Richardson
// combination fine + (fine - coarse)/15.  Generator evaluations are cached by
// grid node, so each halving only evaluates the new nodes.

namespace kmsperturb::ordered_exp {

using linalg::CMatrix;

enum class Side { left, right };

using Generator = std::function<CMatrix(double)>;

struct OdeSettings {
  double tolerance = 1e-10;
  double max_step = 0.125;
  int max_halvings = 16;
};

struct FlowResult {
  CMatrix value;
  /// Frobenius distance between the last two step sizes.
  double error_estimate = 0.0;
  long steps = 0;
};

struct DysonResult {
  /// terms[n] is the n-th order term; terms[0] is the identity.
  std::vector<CMatrix> terms;
  double error_estimate = 0.0;
  long steps = 0;

  CMatrix sum() const;
};

FlowResult solve_flow(const Generator& g, linalg::Index dim, double length, Side side,
                      const OdeSettings& settings);

DysonResult dyson_terms(const Generator& g, linalg::Index dim, double length, int order,
                        Side side, const OdeSettings& settings);

/// sum_{n > order} x^n / n! computed without cancellation.
double exp_tail(double x, int order);

}  // namespace kmsperturb::ordered_exp
