#include <cstdlib>
#include <string>

#include <gtest/gtest.h>

#include "kmsperturb/config.hpp"
#include "kmsperturb/errors.hpp"

using namespace kmsperturb;
using namespace kmsperturb::harness;

namespace {

std::string error_of(std::string_view text) {
  try {
    parse_config(text);
  } catch (const ConfigError& e) {
    return e.what();
  }
  return "";
}

class SeedEnv : public ::testing::Test {
 protected:
  void TearDown() override { unsetenv("KMSPERTURB_SEED"); }
};

}  // namespace

TEST(Config, Defaults) {
  const SuiteConfig cfg = parse_config("{}");
  EXPECT_EQ(cfg.seed, 1u);
  EXPECT_EQ(cfg.observables, 5);
  EXPECT_TRUE(cfg.checks.empty());
  EXPECT_EQ(cfg.quadrature_tolerance, 1e-9);
  EXPECT_EQ(cfg.quadrature_nodes_per_unit, 32);
  EXPECT_EQ(cfg.series.cocycle_order, 12);
  EXPECT_EQ(cfg.flow.series_order, 14);
  EXPECT_NO_THROW(cfg.validate());
}

TEST(Config, ParsesSections) {
  const SuiteConfig cfg = parse_config(R"({
    "seed": 9,
    "checks": ["gns", "hastings.main_theorem"],
    "tolerance_overrides": {"hastings.main_theorem": 1e-7},
    "flow": {"tolerance": 1e-10, "dyson_order": 10},
    "quadrature": {"tolerance": 1e-8, "nodes_per_unit": 64, "scheme": "double_exponential"},
    "series": {"cocycle_order": 8},
    "probes": {"pairs": 4}
  })");
  EXPECT_EQ(cfg.seed, 9u);
  ASSERT_EQ(cfg.checks.size(), 2u);
  EXPECT_EQ(cfg.tolerance_overrides.at("hastings.main_theorem"), 1e-7);
  EXPECT_EQ(cfg.flow.tolerance, 1e-10);
  EXPECT_EQ(cfg.flow.series_order, 10);
  EXPECT_EQ(cfg.quadrature_scheme, kernel::QuadratureScheme::double_exponential);
  EXPECT_EQ(cfg.quadrature().nodes_per_unit, 64);
  EXPECT_EQ(cfg.series.cocycle_order, 8);
  EXPECT_EQ(cfg.probes.pairs, 4);
}

TEST(Config, SyntaxErrorsNameTheLine) {
  const std::string msg = error_of("{\n  \"seed\": 3,\n  \"beta\" 2\n}");
  EXPECT_NE(msg.find("line 3"), std::string::npos) << msg;
}

TEST(Config, FieldErrorsNameThePath) {
  EXPECT_NE(error_of(R"({"quadrature": {"tolerance": -1}})").find("quadrature.tolerance"),
            std::string::npos);
  EXPECT_NE(error_of(R"({"flow": {"max_step": "big"}})").find("flow.max_step"), std::string::npos);
  EXPECT_NE(error_of(R"({"mystery": 1})").find("mystery"), std::string::npos);
  EXPECT_NE(error_of(R"({"model": {"hamiltonian": {"kind": "ising_chain", "sites": 2}, "beta": 0}})").find("beta"), std::string::npos);
  EXPECT_NE(error_of(R"({"seed": -4})").find("seed"), std::string::npos);
  EXPECT_FALSE(error_of(R"({"quadrature": {"scheme": "simpson"}})").empty());
}

TEST(Config, LoadReportsPath) {
  try {
    load_config("/nonexistent/cfg.json");
    FAIL();
  } catch (const ConfigError& e) {
    EXPECT_NE(std::string(e.what()).find("/nonexistent/cfg.json"), std::string::npos);
  }
}

TEST(Config, CanonicalJsonAndHash) {
  const SuiteConfig a = parse_config(R"({"seed": 4, "observables": 3})");
  const SuiteConfig b = parse_config(R"({"observables": 3, "seed": 4})");
  EXPECT_EQ(config_to_json(a), config_to_json(b));
  EXPECT_EQ(config_hash(a), config_hash(b));
  EXPECT_EQ(config_hash(a).size(), 16u);
  EXPECT_NE(config_hash(a), config_hash(parse_config(R"({"seed": 5, "observables": 3})")));
  // The canonical form parses back to the same config.
  EXPECT_EQ(config_to_json(parse_config(config_to_json(a))), config_to_json(a));
}

TEST_F(SeedEnv, Precedence) {
  SuiteConfig cfg = parse_config(R"({"seed": 3})");
  unsetenv("KMSPERTURB_SEED");
  apply_seed_override(cfg, std::nullopt);
  EXPECT_EQ(cfg.seed, 3u);
  setenv("KMSPERTURB_SEED", "99", 1);
  apply_seed_override(cfg, std::nullopt);
  EXPECT_EQ(cfg.seed, 99u);
  apply_seed_override(cfg, 5);
  EXPECT_EQ(cfg.seed, 5u);
  setenv("KMSPERTURB_SEED", "abc", 1);
  EXPECT_THROW(apply_seed_override(cfg, std::nullopt), ConfigError);
  setenv("KMSPERTURB_SEED", "", 1);
  cfg.seed = 3;
  apply_seed_override(cfg, std::nullopt);
  EXPECT_EQ(cfg.seed, 3u);
}

TEST(Config, ParseSeed) {
  EXPECT_EQ(parse_seed("18446744073709551615", "flag"), 18446744073709551615ull);
  EXPECT_THROW(parse_seed("-1", "flag"), ConfigError);
  EXPECT_THROW(parse_seed("12x", "flag"), ConfigError);
  EXPECT_THROW(parse_seed("", "flag"), ConfigError);
}
