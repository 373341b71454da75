// kmsperturb: run the verification suite, convergence sweeps, or dump a model.
//
//   kmsperturb verify --config run.json [--jobs 4] [--out report.json] [--seed 7]
//   kmsperturb sweep  --config run.json --axis dyson_order --values 0,2,4 --out n.csv
//   kmsperturb model  --spec '{"hamiltonian": {...}, "beta": 1}' --out model.json
//
// Exit status: 0 all checks pass, 1 a check failed, 2 bad configuration or usage.

#include <atomic>
#include <cstdio>
#include <cstdlib>
#include <fstream>
#include <iostream>
#include <optional>

#include <CLI11.hpp>

#include "kmsperturb/config.hpp"
#include "kmsperturb/errors.hpp"
#include "kmsperturb/model.hpp"
#include "kmsperturb/suite.hpp"
#include "kmsperturb/sweep.hpp"

namespace kh = kmsperturb::harness;

namespace {

constexpr int kExitConfig = 2;

void write_output(const std::string& path, const std::string& text) {
  if (path.empty() || path == "-") {
    std::cout << text;
    return;
  }
  std::ofstream out(path, std::ios::binary);
  if (!out) throw kmsperturb::ConfigError("cannot write '" + path + "'");
  out << text;
  if (!out) throw kmsperturb::ConfigError("failed writing '" + path + "'");
}

kh::SuiteConfig load(const std::string& path, std::optional<std::uint64_t> seed) {
  kh::SuiteConfig cfg = kh::load_config(path);
  kh::apply_seed_override(cfg, seed);
  return cfg;
}

void print_summary(const kh::VerificationReport& report) {
  for (const auto& r : report.records) {
    std::fprintf(stderr, "%-4s %-36s residual %-12.4e tol %-10.2e %9.2f ms\n",
                 r.pass ? "PASS" : "FAIL", r.name.c_str(), r.residual, r.tolerance,
                 r.runtime_ms);
  }
  std::fprintf(stderr, "%zu/%zu checks passed (seed %llu, dim %ld)\n",
               report.records.size() - report.failures(), report.records.size(),
               static_cast<unsigned long long>(report.meta.seed), report.meta.dim);
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Numerical verification of the perturbed-KMS-state identity"};
  app.set_version_flag("--version", kh::artifact_version());
  app.require_subcommand(1);

  std::string config_path, out_path, axis, values, spec_text;
  int jobs = 1;
  std::optional<std::uint64_t> seed;
  bool quiet = false;

  auto* verify = app.add_subcommand("verify", "Run the verification suite");
  verify->add_option("--config", config_path, "JSON config file")->required();
  verify->add_option("--jobs,-j", jobs, "Checks run concurrently")->check(CLI::Range(1, 256));
  verify->add_option("--out,-o", out_path, "Report path (default: stdout)");
  verify->add_option("--seed", seed, "Seed (overrides KMSPERTURB_SEED and the config)");
  verify->add_flag("--quiet,-q", quiet, "No per-check summary on stderr");

  auto* sweep = app.add_subcommand("sweep", "Convergence sweep over one parameter");
  sweep->add_option("--config", config_path, "JSON config file")->required();
  sweep->add_option("--axis", axis, "dyson_order | quad_nodes | ode_tol | beta | dim")->required();
  sweep->add_option("--values", values, "Comma-separated axis values")->required();
  sweep->add_option("--out,-o", out_path, "CSV path (default: stdout)");
  sweep->add_option("--jobs,-j", jobs, "Rows computed concurrently")->check(CLI::Range(1, 256));
  sweep->add_option("--seed", seed, "Seed (overrides KMSPERTURB_SEED and the config)");

  auto* model = app.add_subcommand("model", "Build a model and write it as JSON");
  model->add_option("--spec", spec_text, "Inline JSON model spec")->required();
  model->add_option("--out,-o", out_path, "Output path (default: stdout)");
  model->add_option("--seed", seed, "Seed for random operators without their own seed");

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e);
    return code == 0 ? 0 : kExitConfig;
  }

  try {
    if (*verify) {
      const kh::SuiteConfig cfg = load(config_path, seed);
      std::atomic<std::size_t> done{0};
      const auto report = kh::run_suite(cfg, {jobs, &done});
      write_output(out_path, kh::report_to_json(report));
      if (!quiet) print_summary(report);
      return kh::exit_code(report);
    }
    if (*sweep) {
      const kh::SuiteConfig cfg = load(config_path, seed);
      const auto table = kh::sweep(cfg, kh::parse_axis(axis), kh::parse_values(values), jobs);
      write_output(out_path, kh::sweep_to_csv(table));
      return 0;
    }
    if (*model) {
      const kh::ModelSpec spec = kh::parse_model_spec(spec_text);
      std::uint64_t s = 0;
      if (seed) {
        s = *seed;
      } else if (const char* env = std::getenv("KMSPERTURB_SEED"); env && *env) {
        s = kh::parse_seed(env, "KMSPERTURB_SEED");
      }
      write_output(out_path, kh::model_to_json(spec, kh::build_model(spec, s)));
      return 0;
    }
  } catch (const kmsperturb::ConfigError& e) {
    std::cerr << "config error: " << e.what() << "\n";
    return kExitConfig;
  } catch (const kmsperturb::Error& e) {
    std::cerr << "error: " << e.what() << "\n";
    return kExitConfig;
  }
  return 0;
}
