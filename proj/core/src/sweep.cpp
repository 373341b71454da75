#include "kmsperturb/sweep.hpp"

#include <cmath>
#include <limits>
#include <sstream>

#include "json_util.hpp"
#include "kmsperturb/duhamel.hpp"
#include "kmsperturb/errors.hpp"
#include "kmsperturb/random.hpp"
#include "kmsperturb/suite.hpp"

namespace kmsperturb::harness {

namespace {

constexpr double kNaN = std::numeric_limits<double>::quiet_NaN();

/// Observables shared by every row so rows differ only in the swept value.
std::vector<CMatrix> sweep_observables(const SuiteConfig& cfg, Index dim) {
  Rng rng(derive_seed(cfg.seed, 0x5377656570ULL));
  std::vector<CMatrix> out;
  for (int k = 0; k < cfg.observables; ++k) {
    CMatrix a = random_matrix(dim, rng);
    out.push_back(a / linalg::op_norm(a));
  }
  return out;
}

double main_theorem_residual(const Model& m, const std::vector<CMatrix>& obs,
                             const CMatrix& theta) {
  double worst = 0.0;
  for (const CMatrix& a : obs) {
    const auto lhs = hastings::hastings_state(m.sys, theta, a);
    const auto rhs = hastings::gibbs_expectation(m.sys, m.v, a);
    worst = std::max(worst, std::abs(lhs - rhs) / std::max(1.0, std::abs(rhs)));
  }
  return worst;
}

int as_int(double x, const char* axis, int lo, int hi) {
  if (!(x >= lo && x <= hi) || x != std::floor(x))
    throw ConfigError(std::string("sweep axis ") + axis + ": value " + detail::exact_decimal(x) +
                      " must be an integer in [" + std::to_string(lo) + ", " +
                      std::to_string(hi) + "]");
  return static_cast<int>(x);
}

void fill_nan(std::vector<double>& row, std::size_t width) { row.resize(width, kNaN); }

}  // namespace

SweepAxis parse_axis(std::string_view name) {
  if (name == "dyson_order" || name == "N") return SweepAxis::dyson_order;
  if (name == "quad_nodes") return SweepAxis::quad_nodes;
  if (name == "ode_tol") return SweepAxis::ode_tol;
  if (name == "beta") return SweepAxis::beta;
  if (name == "dim") return SweepAxis::dim;
  throw ConfigError("unknown sweep axis '" + std::string(name) +
                    "' (expected dyson_order, quad_nodes, ode_tol, beta or dim)");
}

std::string_view axis_name(SweepAxis axis) {
  switch (axis) {
    case SweepAxis::dyson_order: return "dyson_order";
    case SweepAxis::quad_nodes: return "quad_nodes";
    case SweepAxis::ode_tol: return "ode_tol";
    case SweepAxis::beta: return "beta";
    case SweepAxis::dim: return "dim";
  }
  return "";
}

std::vector<double> parse_values(std::string_view csv) {
  std::vector<double> out;
  std::size_t pos = 0;
  while (pos <= csv.size()) {
    const std::size_t comma = std::min(csv.find(',', pos), csv.size());
    std::string item(csv.substr(pos, comma - pos));
    const auto b = item.find_first_not_of(" \t");
    const auto e = item.find_last_not_of(" \t");
    item = b == std::string::npos ? "" : item.substr(b, e - b + 1);
    std::size_t used = 0;
    double v = 0.0;
    try {
      v = std::stod(item, &used);
    } catch (const std::exception&) {
      used = 0;
    }
    if (item.empty() || used != item.size() || !std::isfinite(v))
      throw ConfigError("invalid sweep value '" + item + "'");
    out.push_back(v);
    pos = comma + 1;
  }
  return out;
}

SweepTable sweep(const SuiteConfig& base, SweepAxis axis, const std::vector<double>& values,
                 int jobs) {
  base.validate();
  if (values.empty()) throw ConfigError("sweep: no values given");
  SweepTable table;
  switch (axis) {
    case SweepAxis::dyson_order:
      table.header = {"dyson_order",     "theta_residual", "theta_bound", "cocycle_residual",
                      "cocycle_bound",   "araki_residual", "araki_bound"};
      for (double v : values) as_int(v, "dyson_order", 0, 200);
      break;
    case SweepAxis::quad_nodes:
      table.header = {"nodes_per_unit", "phi_residual", "phi_budget", "phi_error_estimate",
                      "fourier_residual_max"};
      for (double v : values) as_int(v, "quad_nodes", 1, 4096);
      break;
    case SweepAxis::ode_tol:
      table.header = {"ode_tol", "main_theorem_residual", "theta_error_estimate", "ode_steps"};
      for (double v : values)
        if (!(v > 0.0)) throw ConfigError("sweep axis ode_tol: values must be > 0");
      break;
    case SweepAxis::beta:
      table.header = {"beta", "main_theorem_residual", "kms_residual", "factorization_residual",
                      "g_delta_residual"};
      for (double v : values)
        if (!(v > 0.0)) throw ConfigError("sweep axis beta: values must be > 0");
      break;
    case SweepAxis::dim:
      table.header = {"dim", "failed_checks", "total_checks", "main_theorem_residual"};
      if (!std::holds_alternative<RandomHermitianSpec>(base.model.hamiltonian))
        throw ConfigError("sweep axis dim needs a random_hermitian hamiltonian");
      for (double v : values) as_int(v, "dim", 1, static_cast<int>(kMaxDim));
      break;
  }

  table.rows.resize(values.size());
  const std::size_t width = table.header.size();
  // Model construction is part of each row so the dim and beta axes can vary it.
  parallel_for(values.size(), jobs, [&](std::size_t i) {
    const double x = values[i];
    SuiteConfig cfg = base;
    std::vector<double>& row = table.rows[i];
    row.push_back(x);
    if (axis == SweepAxis::beta) cfg.model.beta = x;
    if (axis == SweepAxis::dim) {
      std::get<RandomHermitianSpec>(cfg.model.hamiltonian).dim = static_cast<int>(x);
      if (auto* p = std::get_if<RandomHermitianSpec>(&cfg.model.perturbation.op)) p->dim.reset();
      if (std::holds_alternative<ExplicitSpec>(cfg.model.perturbation.op) ||
          std::holds_alternative<LocalPauliSpec>(cfg.model.perturbation.op))
        throw ConfigError("sweep axis dim needs a random or zero perturbation");
    }
    try {
      const Model m = build_model(cfg.model, cfg.seed);
      const auto obs = sweep_observables(cfg, m.sys.dim());
      switch (axis) {
        case SweepAxis::dyson_order: {
          const int n = static_cast<int>(x);
          const auto ode = hastings::theta_ode(m.sys, m.v, 1.0, cfg.flow);
          const auto dyson = hastings::theta_dyson(m.sys, m.v, 1.0, n, cfg.flow.ode());
          row.push_back(linalg::frob_norm(dyson.value - ode.value));
          row.push_back(dyson.tail_bound + dyson.integrator_error + ode.error_estimate);
          const double t = cfg.series.cocycle_time;
          const auto cs = duhamel::cocycle_series(m.sys, m.v, t, n, cfg.flow.ode());
          row.push_back(linalg::op_norm(cs.value - duhamel::cocycle_exact(m.sys, m.v, t)));
          row.push_back(cs.tail_bound + cs.integrator_error);
          const auto as = duhamel::araki_vector_series(m.sys, m.v, n, cfg.flow.ode());
          row.push_back(
              linalg::frob_norm(as.value.mat - duhamel::araki_vector_exact(m.sys, m.v).mat));
          row.push_back(as.tail_bound + as.integrator_error);
          break;
        }
        case SweepAxis::quad_nodes: {
          cfg.quadrature_nodes_per_unit = static_cast<int>(x);
          const auto spec = cfg.quadrature();
          const double u = cfg.probes.flow_point;
          const auto quad = hastings::phi_quadrature(m.sys, m.v, u, spec);
          row.push_back(linalg::frob_norm(quad.value.mat() -
                                          hastings::phi_spectral(m.sys, m.v, u).mat()));
          row.push_back(quad.budget);
          row.push_back(quad.error_estimate);
          double worst = 0.0;
          for (int k = 0; k <= 20; ++k)
            worst = std::max(worst, kernel::fourier_residual(-20.0 + 2.0 * k, spec));
          row.push_back(worst);
          break;
        }
        case SweepAxis::ode_tol: {
          cfg.flow.tolerance = x;
          const auto ode = hastings::theta_ode(m.sys, m.v, 1.0, cfg.flow);
          row.push_back(main_theorem_residual(m, obs, ode.value));
          row.push_back(ode.error_estimate);
          row.push_back(static_cast<double>(ode.steps));
          break;
        }
        case SweepAxis::beta: {
          const auto ode = hastings::theta_ode(m.sys, m.v, 1.0, cfg.flow);
          row.push_back(main_theorem_residual(m, obs, ode.value));
          double kms = 0.0;
          for (std::size_t k = 0; k + 1 < obs.size(); ++k)
            kms = std::max(kms, gns::kms_residual(m.sys, m.v, obs[k], obs[k + 1]));
          row.push_back(kms);
          const HermMatrix v_phys = cfg.model.perturbation.convention == Convention::physical
                                        ? m.v_input
                                        : m.v * (-1.0 / m.sys.beta());
          row.push_back(duhamel::duhamel_factorization_check(m.sys, v_phys, m.sys.beta()));
          row.push_back(hastings::g_delta_identity_residual(m.sys, m.v, cfg.probes.flow_point));
          break;
        }
        case SweepAxis::dim: {
          const auto report = run_suite(cfg);
          row.push_back(static_cast<double>(report.failures()));
          row.push_back(static_cast<double>(report.records.size()));
          const auto ode = hastings::theta_ode(m.sys, m.v, 1.0, cfg.flow);
          row.push_back(main_theorem_residual(m, obs, ode.value));
          break;
        }
      }
    } catch (const ConfigError&) {
      throw;
    } catch (const Error&) {
      // The row keeps its axis value; the failed computation reads as NaN.
    }
    fill_nan(row, width);
  });
  return table;
}

std::string sweep_to_csv(const SweepTable& table) {
  std::ostringstream os;
  for (std::size_t k = 0; k < table.header.size(); ++k) os << (k ? "," : "") << table.header[k];
  os << "\n";
  for (const auto& row : table.rows) {
    for (std::size_t k = 0; k < row.size(); ++k) os << (k ? "," : "") << detail::scientific(row[k], 15);
    os << "\n";
  }
  return os.str();
}

}  // namespace kmsperturb::harness
