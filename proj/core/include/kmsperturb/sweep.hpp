#pragma once

#include <string>
#include <string_view>
#include <vector>

#include "kmsperturb/config.hpp"

namespace kmsperturb::harness {

enum class SweepAxis { dyson_order, quad_nodes, ode_tol, beta, dim };

/// Accepts "dyson_order" (alias "N"), "quad_nodes", "ode_tol", "beta", "dim".
SweepAxis parse_axis(std::string_view name);
std::string_view axis_name(SweepAxis axis);

/// Parses a comma-separated list of numbers.
std::vector<double> parse_values(std::string_view csv);

struct SweepTable {
  std::vector<std::string> header;
  /// One row per axis value, in input order.
  std::vector<std::vector<double>> rows;
};

/// One row per value.  Columns by axis:
///   dyson_order  theta/cocycle/araki residual and a priori bound (truncation
///                tail plus the integrator's own error estimates)
///   quad_nodes   Phi quadrature residual and budget, max Fourier residual
///   ode_tol      main-theorem residual, ODE error estimate and step count
///   beta         main-theorem, KMS, factorization and G(Delta) residuals
///   dim          failed and total suite checks, main-theorem residual
/// A computation that raises yields NaN in its columns.  Throws ConfigError
/// for invalid axis values or a dim sweep on a non-random model.
SweepTable sweep(const SuiteConfig& cfg, SweepAxis axis, const std::vector<double>& values,
                 int jobs = 1);

/// Header row then one line per row; every value as "%.15e".
std::string sweep_to_csv(const SweepTable& table);

}  // namespace kmsperturb::harness
