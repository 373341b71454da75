#pragma once

#include <cstdint>
#include <map>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

#include "kmsperturb/hastings.hpp"
#include "kmsperturb/kernel.hpp"
#include "kmsperturb/model.hpp"

namespace kmsperturb::harness {

struct SeriesSettings {
  int cocycle_order = 12;
  int araki_order = 15;
  double cocycle_time = 0.7;
};

/// Parameters of the finite-difference and continuity checks.
struct ProbeSettings {
  /// Flow parameter s at which derivatives are probed.
  double flow_point = 0.5;
  std::vector<double> fd_steps = {1e-3, 1e-4};
  std::vector<double> stability_eps = {0.1, 0.05, 0.025};
  /// Pairs drawn for the KMS and Cauchy-Schwarz checks.
  int pairs = 20;
  /// Samples of (V, u) for the Phi norm bound.
  int phi_samples = 20;
};

struct SuiteConfig {
  std::uint64_t seed = 1;
  ModelSpec model;
  int observables = 5;
  /// Names or module prefixes ("gns", "hastings.main_theorem"); empty means all.
  std::vector<std::string> checks;
  std::map<std::string, double> tolerance_overrides;
  hastings::FlowSpec flow;
  double quadrature_tolerance = 1e-9;
  int quadrature_nodes_per_unit = 32;
  kernel::QuadratureScheme quadrature_scheme = kernel::QuadratureScheme::split_singular;
  SeriesSettings series;
  ProbeSettings probes;

  kernel::QuadratureSpec quadrature() const;
  /// Throws ConfigError when a field is out of range.
  void validate() const;
};

/// Parses a JSON config document.  Every key is optional; errors carry the
/// line/column of syntax errors or the dotted path of the offending field.
SuiteConfig parse_config(std::string_view text);
SuiteConfig load_config(const std::string& path);

/// Canonical JSON of the fully-resolved config (sorted keys, defaults filled).
std::string config_to_json(const SuiteConfig& cfg);

/// FNV-1a 64 of config_to_json, as 16 hex digits.
std::string config_hash(const SuiteConfig& cfg);

/// Seed precedence: flag > KMSPERTURB_SEED > config.  Throws ConfigError for a
/// malformed environment value.
void apply_seed_override(SuiteConfig& cfg, std::optional<std::uint64_t> flag_seed);

std::uint64_t parse_seed(std::string_view text, std::string_view origin);

std::string_view scheme_name(kernel::QuadratureScheme s);

}  // namespace kmsperturb::harness
