#include <cmath>

#include <gtest/gtest.h>

#include "kmsperturb/config.hpp"
#include "kmsperturb/errors.hpp"
#include "kmsperturb/sweep.hpp"

using namespace kmsperturb;
using namespace kmsperturb::harness;

namespace {

SuiteConfig config(const std::string& name) {
  return load_config(std::string(KMSPERTURB_CONFIG_DIR) + "/" + name);
}

std::size_t column(const SweepTable& t, const std::string& name) {
  for (std::size_t i = 0; i < t.header.size(); ++i)
    if (t.header[i] == name) return i;
  throw std::out_of_range(name);
}

}  // namespace

TEST(Sweep, AxisNames) {
  EXPECT_EQ(parse_axis("N"), SweepAxis::dyson_order);
  EXPECT_EQ(parse_axis("dyson_order"), SweepAxis::dyson_order);
  EXPECT_EQ(axis_name(SweepAxis::ode_tol), "ode_tol");
  EXPECT_THROW(parse_axis("gamma"), ConfigError);
  const auto v = parse_values("1, 2.5,1e-3");
  ASSERT_EQ(v.size(), 3u);
  EXPECT_EQ(v[2], 1e-3);
  EXPECT_THROW(parse_values("1,,2"), ConfigError);
  EXPECT_THROW(parse_values("x"), ConfigError);
}

TEST(Sweep, DysonOrderResidualsStayBelowBounds) {
  std::vector<double> orders;
  for (int n = 0; n <= 12; ++n) orders.push_back(n);
  const auto t = sweep(config("random_d4.json"), SweepAxis::dyson_order, orders);
  ASSERT_EQ(t.rows.size(), orders.size());
  for (const std::string series : {"theta", "cocycle", "araki"}) {
    const std::size_t r = column(t, series + "_residual");
    const std::size_t b = column(t, series + "_bound");
    for (const auto& row : t.rows) EXPECT_LE(row[r], row[b]) << series << " N=" << row[0];
    EXPECT_LT(t.rows.back()[r], t.rows.front()[r]);
  }
}

TEST(Sweep, OdeToleranceTightens) {
  const auto t = sweep(config("random_d4.json"), SweepAxis::ode_tol, {1e-6, 1e-8, 1e-10});
  const std::size_t c = column(t, "main_theorem_residual");
  EXPECT_GT(t.rows[0][c], t.rows[1][c]);
  EXPECT_GT(t.rows[1][c], t.rows[2][c]);
  EXPECT_LE(t.rows[2][c], 1e-9);
}

TEST(Sweep, DimensionSweepPasses) {
  const auto t = sweep(config("random_d4.json"), SweepAxis::dim, {2, 4, 8, 16});
  const std::size_t failed = column(t, "failed_checks");
  const std::size_t total = column(t, "total_checks");
  for (const auto& row : t.rows) {
    EXPECT_EQ(row[failed], 0.0) << "dim " << row[0];
    EXPECT_GT(row[total], 0.0);
  }
  EXPECT_THROW(sweep(config("ising4.json"), SweepAxis::dim, {2}), ConfigError);
}

TEST(Sweep, QuadNodesReportBudgetFailuresAsNaN) {
  const auto t = sweep(config("random_d4.json"), SweepAxis::quad_nodes, {4, 32});
  const std::size_t c = column(t, "phi_residual");
  EXPECT_TRUE(std::isnan(t.rows[0][c]));
  EXPECT_LE(t.rows[1][c], t.rows[1][column(t, "phi_budget")]);
}

TEST(Sweep, BetaRows) {
  const auto t = sweep(config("random_d4.json"), SweepAxis::beta, {0.5, 1.0, 2.0});
  for (const auto& row : t.rows)
    for (std::size_t i = 1; i < row.size(); ++i) EXPECT_LE(row[i], 1e-6) << t.header[i];
  EXPECT_THROW(sweep(config("random_d4.json"), SweepAxis::beta, {-1.0}), ConfigError);
}

TEST(Sweep, CsvFormat) {
  SweepTable t{{"a", "b"}, {{1.0, 0.25}, {2.0, std::nan("")}}};
  const std::string csv = sweep_to_csv(t);
  EXPECT_EQ(csv,
            "a,b\n"
            "1.000000000000000e+00,2.500000000000000e-01\n"
            "2.000000000000000e+00,nan\n");
}
