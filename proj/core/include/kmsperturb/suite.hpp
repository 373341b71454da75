#pragma once

#include <atomic>
#include <functional>
#include <cstdint>
#include <string>
#include <vector>

#include "kmsperturb/config.hpp"

namespace kmsperturb::harness {

inline constexpr int kReportSchemaVersion = 1;

struct CheckInfo {
  std::string name;
  std::string module;
  /// The statement being checked, or "plumbing".
  std::string anchor;
  /// Identifiers of the computational routes compared by the check.
  std::vector<std::string> paths;
};

/// Every registered check, in report order.
const std::vector<CheckInfo>& check_catalog();

/// Catalog entries enabled by cfg.checks (exact names or module prefixes).
/// Throws ConfigError for a selector that matches nothing.
std::vector<CheckInfo> select_checks(const SuiteConfig& cfg);

struct CheckRecord {
  std::string name;
  std::string anchor;
  double residual = 0.0;
  double tolerance = 0.0;
  bool pass = false;
  double runtime_ms = 0.0;
  std::vector<std::string> paths;
  /// Extra context: error messages, raw series of ratios.
  std::string detail;
};

struct ReportMetadata {
  int schema_version = kReportSchemaVersion;
  std::uint64_t seed = 0;
  long dim = 0;
  double beta = 0.0;
  std::string config_hash;
  std::string artifact_version;
  std::string timestamp;
};

struct VerificationReport {
  ReportMetadata meta;
  std::vector<CheckRecord> records;

  bool all_pass() const;
  std::size_t failures() const;
};

struct RunOptions {
  int jobs = 1;
  /// Incremented once per finished check; may be read concurrently.
  std::atomic<std::size_t>* progress = nullptr;
};

/// Runs the enabled checks.  Each check draws its random inputs from a stream
/// derived from (cfg.seed, check name), so results do not depend on `jobs` or
/// on which other checks are enabled.  Throws ConfigError if the model cannot
/// be built.
VerificationReport run_suite(const SuiteConfig& cfg, const RunOptions& options = {});

/// Report as JSON.  Residuals and tolerances are decimal strings.  With
/// `include_timing = false` the timestamp and runtime_ms fields are omitted,
/// which makes the output a pure function of the config.
std::string report_to_json(const VerificationReport& report, bool include_timing = true);

/// 0 if every check passed, 1 otherwise.
int exit_code(const VerificationReport& report);

std::string artifact_version();

/// Runs body(i) for i in [0, count) on up to `jobs` threads.  The first
/// exception thrown by a body is rethrown after all threads join.
void parallel_for(std::size_t count, int jobs, const std::function<void(std::size_t)>& body);

}  // namespace kmsperturb::harness
