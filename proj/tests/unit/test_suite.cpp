#include <chrono>
#include <map>
#include <set>

#include <gtest/gtest.h>
#include <json.hpp>

#include "kmsperturb/config.hpp"
#include "kmsperturb/errors.hpp"
#include "kmsperturb/suite.hpp"

using namespace kmsperturb;
using namespace kmsperturb::harness;

namespace {

SuiteConfig config(const std::string& name) {
  return load_config(std::string(KMSPERTURB_CONFIG_DIR) + "/" + name);
}

const CheckRecord& record(const VerificationReport& r, const std::string& name) {
  for (const auto& rec : r.records)
    if (rec.name == name) return rec;
  throw std::out_of_range(name);
}

}  // namespace

TEST(Suite, CatalogIsWellFormed) {
  std::set<std::string> names;
  for (const auto& c : check_catalog()) {
    EXPECT_TRUE(names.insert(c.name).second) << "duplicate " << c.name;
    EXPECT_EQ(c.name.rfind(c.module + ".", 0), 0u) << c.name;
    EXPECT_FALSE(c.anchor.empty()) << c.name;
    EXPECT_FALSE(c.paths.empty()) << c.name;
  }
}

// Every public operation of the numerical modules is exercised by at least one check.
TEST(Suite, CoversEveryPublicOperation) {
  const std::map<std::string, std::vector<std::string>> coverage = {
      {"gns::build_gibbs", {"gns.gibbs_invariants"}},
      {"gns::modular_flow", {"gns.modular_automorphism", "gns.modular_group_law"}},
      {"gns::state_eval", {"gns.state_trace_identity"}},
      {"gns::rel_modular_apply", {"gns.s_operator", "gns.dictionary_araki_vector"}},
      {"gns::kms_residual", {"gns.kms_unperturbed", "gns.kms_perturbed"}},
      {"gns::dictionary", {"gns.liouvillean_dictionary", "gns.vector_invariance"}},
      {"gns::min_singular_value", {"gns.cyclic_separating"}},
      {"duhamel::cocycle_exact", {"duhamel.cocycle_unitarity", "duhamel.cocycle_chain_rule"}},
      {"duhamel::cocycle_series", {"duhamel.cocycle_series"}},
      {"duhamel::perturbed_flow_check", {"duhamel.perturbed_flow"}},
      {"duhamel::araki_vector_exact", {"duhamel.araki_series"}},
      {"duhamel::araki_vector_series", {"duhamel.araki_series"}},
      {"duhamel::duhamel_factorization_check", {"duhamel.factorization"}},
      {"duhamel::araki_derivative", {"duhamel.araki_derivative", "duhamel.araki_derivative_order"}},
      {"kernel::quadrature", {"kernel.l1_mass", "kernel.raw_l1_mass"}},
      {"kernel::fourier_transform", {"kernel.fourier_pair"}},
      {"kernel::G_eval", {"kernel.g_f_identity"}},
      {"kernel::f_series", {"kernel.series_consistency"}},
      {"kernel::tail_mass", {"kernel.tail_bound"}},
      {"hastings::phi_spectral", {"hastings.phi_norm_bound", "hastings.phi_hermitian"}},
      {"hastings::phi_quadrature", {"hastings.phi_two_path"}},
      {"hastings::theta_ode", {"hastings.theta_two_path", "hastings.theta_norm_bound"}},
      {"hastings::theta_dyson", {"hastings.theta_two_path"}},
      {"hastings::hastings_state", {"hastings.main_theorem", "hastings.physical_units"}},
      {"hastings::g_delta_identity_residual", {"hastings.g_delta_identity"}},
      {"hastings::flow_equation_residual", {"hastings.flow_equation", "hastings.flow_equation_order"}},
      {"hastings::flow_derivative_integral", {"hastings.derivative_integral_form"}},
      {"hastings::stability_residual", {"hastings.stability"}},
      {"hastings::phi_u_continuity", {"hastings.phi_u_continuity"}},
      {"hastings::phi_v_continuity", {"hastings.phi_v_continuity"}},
      {"hastings::cauchy_schwarz", {"hastings.cauchy_schwarz"}},
  };
  std::set<std::string> names;
  for (const auto& c : check_catalog()) names.insert(c.name);
  for (const auto& [op, checks] : coverage)
    for (const auto& c : checks) EXPECT_TRUE(names.count(c)) << op << " -> " << c;
}

TEST(Suite, UnperturbedDefaultConfigPasses) {
  const SuiteConfig cfg = config("default.json");
  const auto report = run_suite(cfg);
  EXPECT_TRUE(report.all_pass());
  EXPECT_EQ(report.records.size(), check_catalog().size());
  // With V = 0 both sides of every perturbation identity reduce to the same
  // unperturbed quantity.
  for (const char* name :
       {"gns.gibbs_invariants", "gns.kms_unperturbed", "gns.kms_perturbed",
        "duhamel.cocycle_unitarity", "duhamel.perturbed_flow", "duhamel.factorization",
        "duhamel.cocycle_chain_rule", "hastings.main_theorem", "hastings.physical_units",
        "hastings.theta_two_path", "hastings.g_delta_identity", "hastings.phi_hermitian"}) {
    EXPECT_LE(record(report, name).residual, 1e-10) << name;
  }
  for (const auto& r : report.records) EXPECT_TRUE(r.pass) << r.name << ": " << r.detail;
}

TEST(Suite, RandomInstancePasses) {
  const auto t0 = std::chrono::steady_clock::now();
  const auto report = run_suite(config("random_d4.json"));
  const double secs =
      std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
  for (const auto& r : report.records) EXPECT_TRUE(r.pass) << r.name << ": " << r.detail;
  EXPECT_EQ(exit_code(report), 0);
  EXPECT_LE(record(report, "hastings.main_theorem").residual, 1e-6);
  EXPECT_LT(secs, 60.0);
}

TEST(Suite, ImpossibleToleranceFails) {
  const auto report = run_suite(config("failing.json"));
  ASSERT_EQ(report.records.size(), 1u);
  EXPECT_FALSE(report.records[0].pass);
  EXPECT_EQ(report.records[0].tolerance, 1e-20);
  EXPECT_EQ(report.failures(), 1u);
  EXPECT_EQ(exit_code(report), 1);
}

TEST(Suite, SelectionAndUnknownNames) {
  SuiteConfig cfg = config("default.json");
  cfg.checks = {"kernel"};
  for (const auto& c : select_checks(cfg)) EXPECT_EQ(c.module, "kernel");
  cfg.checks = {"kernel.nope"};
  EXPECT_THROW(select_checks(cfg), ConfigError);
  cfg.checks = {};
  cfg.tolerance_overrides = {{"gns.nope", 1.0}};
  EXPECT_THROW(select_checks(cfg), ConfigError);
}

TEST(Suite, DeterministicAcrossJobCounts) {
  SuiteConfig cfg = config("random_d4.json");
  cfg.checks = {"gns", "hastings.main_theorem", "hastings.stability", "duhamel.cocycle_series"};
  const std::string a = report_to_json(run_suite(cfg, {1, nullptr}), false);
  const std::string b = report_to_json(run_suite(cfg, {3, nullptr}), false);
  EXPECT_EQ(a, b);
  // Enabling other checks does not change a check's inputs.
  SuiteConfig single = cfg;
  single.checks = {"hastings.main_theorem"};
  const auto one = run_suite(single);
  EXPECT_EQ(one.records[0].residual, record(run_suite(cfg), "hastings.main_theorem").residual);
}

TEST(Suite, ReportJsonShape) {
  SuiteConfig cfg = config("default.json");
  cfg.checks = {"kernel.g_f_identity"};
  const auto j = nlohmann::json::parse(report_to_json(run_suite(cfg)));
  EXPECT_EQ(j.at("schema_version").get<int>(), kReportSchemaVersion);
  EXPECT_EQ(j.at("metadata").at("seed").get<std::uint64_t>(), 1u);
  EXPECT_EQ(j.at("metadata").at("config_hash").get<std::string>(), config_hash(cfg));
  EXPECT_TRUE(j.at("summary").at("all_pass").get<bool>());
  const auto& c = j.at("checks").at(0);
  EXPECT_EQ(c.at("name"), "kernel.g_f_identity");
  EXPECT_TRUE(c.at("residual").is_string());
  EXPECT_TRUE(c.contains("runtime_ms"));
  EXPECT_TRUE(j.contains("timestamp"));
  const auto bare = nlohmann::json::parse(report_to_json(run_suite(cfg), false));
  EXPECT_FALSE(bare.contains("timestamp"));
  EXPECT_FALSE(bare.at("checks").at(0).contains("runtime_ms"));
}

TEST(Suite, ErrorsBecomeFailingRecords) {
  SuiteConfig cfg = config("random_d4.json");
  cfg.checks = {"hastings.phi_two_path"};
  cfg.quadrature_nodes_per_unit = 4;
  cfg.quadrature_scheme = kernel::QuadratureScheme::double_exponential;
  const auto report = run_suite(cfg);
  ASSERT_EQ(report.records.size(), 1u);
  EXPECT_FALSE(report.records[0].pass);
  EXPECT_NE(report.records[0].detail.find("error"), std::string::npos);
}

TEST(Suite, ParallelForRunsEverythingAndRethrows) {
  std::vector<int> hits(100, 0);
  parallel_for(hits.size(), 4, [&](std::size_t i) { hits[i] += 1; });
  for (int h : hits) EXPECT_EQ(h, 1);
  EXPECT_THROW(parallel_for(10, 3,
                            [](std::size_t i) {
                              if (i == 7) throw std::runtime_error("boom");
                            }),
               std::runtime_error);
}
