#include <cmath>

#include <gtest/gtest.h>
#include <json.hpp>

#include "kmsperturb/errors.hpp"
#include "kmsperturb/model.hpp"
#include "oracles.hpp"

using namespace kmsperturb;
using namespace kmsperturb::harness;
using linalg::Complex;

namespace {

CMatrix pauli(char p) {
  CMatrix m(2, 2);
  switch (p) {
    case 'x': m << 0, 1, 1, 0; break;
    case 'y': m << 0, Complex(0, -1), Complex(0, 1), 0; break;
    case 'z': m << 1, 0, 0, -1; break;
    default: m = CMatrix::Identity(2, 2);
  }
  return m;
}

}  // namespace

TEST(Model, IsingTwoSites) {
  const HermMatrix h = build_operator(IsingChainSpec{2, 1.0, 0.0});
  CMatrix want = CMatrix::Zero(4, 4);
  want.diagonal() << -1.0, 1.0, 1.0, -1.0;
  EXPECT_EQ(h.mat(), want);
}

TEST(Model, IsingMatchesKroneckerOracle) {
  const HermMatrix h = build_operator(IsingChainSpec{3, 0.7, 0.4});
  const CMatrix i2 = CMatrix::Identity(2, 2);
  using oracle::kron;
  const CMatrix zz = kron(kron(pauli('z'), pauli('z')), i2) + kron(i2, kron(pauli('z'), pauli('z')));
  const CMatrix x = kron(kron(pauli('x'), i2), i2) + kron(kron(i2, pauli('x')), i2) +
                    kron(kron(i2, i2), pauli('x'));
  EXPECT_LE((h.mat() - (-0.7 * zz - 0.4 * x)).norm(), 1e-15);
}

TEST(Model, HeisenbergTwoSites) {
  const HermMatrix h = build_operator(HeisenbergChainSpec{2, 1.0});
  const CMatrix want = oracle::kron(pauli('x'), pauli('x')) + oracle::kron(pauli('y'), pauli('y')) +
                       oracle::kron(pauli('z'), pauli('z'));
  EXPECT_LE((h.mat() - want).norm(), 1e-15);
  // Singlet energy -3, triplet +1.
  const auto s = linalg::herm_eig(h);
  EXPECT_NEAR(s.eigenvalues(0), -3.0, 1e-14);
  EXPECT_NEAR(s.eigenvalues(3), 1.0, 1e-14);
}

TEST(Model, SiteZeroIsLeftmost) {
  const HermMatrix p = build_operator(LocalPauliSpec{2, 0, 'z', 2.0});
  EXPECT_LE((p.mat() - 2.0 * oracle::kron(pauli('z'), CMatrix::Identity(2, 2))).norm(), 0.0);
  EXPECT_EQ(pauli_product(3, 1, "xy"),
            oracle::kron(CMatrix::Identity(2, 2), oracle::kron(pauli('x'), pauli('y'))));
}

TEST(Model, RandomDeterminism) {
  RandomHermitianSpec spec;
  spec.dim = 4;
  spec.norm_scale = 3.0;
  const HermMatrix a = build_operator(spec, std::nullopt, 42);
  const HermMatrix b = build_operator(spec, std::nullopt, 42);
  const HermMatrix c = build_operator(spec, std::nullopt, 43);
  EXPECT_EQ(a.mat(), b.mat());
  EXPECT_NE(a.mat(), c.mat());
  EXPECT_NEAR(linalg::op_norm(a.mat()), 3.0, 1e-13);
  spec.seed = 42;
  EXPECT_EQ(build_operator(spec, std::nullopt, 7).mat(), a.mat());
}

TEST(Model, BuildModelStreams) {
  ModelSpec spec;
  spec.hamiltonian = RandomHermitianSpec{4, std::nullopt, 1.0};
  spec.perturbation.op = RandomHermitianSpec{};
  const Model m1 = build_model(spec, 5);
  const Model m2 = build_model(spec, 5);
  EXPECT_EQ(m1.v.mat(), m2.v.mat());
  EXPECT_EQ(m1.sys.hamiltonian().mat(), build_operator(spec.hamiltonian, std::nullopt, 5).mat());
  EXPECT_EQ(m1.v.mat(), build_operator(RandomHermitianSpec{}, 4, derive_seed(5, 1)).mat());
  EXPECT_NE(derive_seed(5, 1), derive_seed(5, 2));
  EXPECT_NE(derive_seed(5, 1), derive_seed(6, 1));
}

TEST(Model, PhysicalConvention) {
  ModelSpec spec;
  spec.hamiltonian = IsingChainSpec{2, 1.0, 0.5};
  spec.beta = 2.5;
  spec.perturbation = {LocalPauliSpec{2, 1, 'x', 0.3}, Convention::physical};
  const Model m = build_model(spec);
  EXPECT_LE((m.v.mat() + 2.5 * m.v_input.mat()).norm(), 1e-15);
  spec.perturbation.convention = Convention::modular;
  const Model mod = build_model(spec);
  EXPECT_EQ(mod.v.mat(), mod.v_input.mat());
}

TEST(Model, ExplicitRoundTrip) {
  const std::string text = R"({
    "hamiltonian": {"kind": "explicit", "matrix": [[1, [0.5, -0.25]], [[0.5, 0.25], -2]]},
    "beta": 0.75,
    "perturbation": {"kind": "zero"}
  })";
  const ModelSpec spec = parse_model_spec(text);
  const ModelSpec again = parse_model_spec(model_spec_to_json(spec));
  const auto& m = std::get<ExplicitSpec>(again.hamiltonian).matrix;
  EXPECT_EQ(m(0, 1), Complex(0.5, -0.25));
  EXPECT_EQ(m(1, 0), Complex(0.5, 0.25));
  EXPECT_EQ(m(1, 1), Complex(-2.0, 0.0));
  EXPECT_EQ(again.beta, 0.75);
  EXPECT_EQ(model_spec_to_json(spec), model_spec_to_json(again));
}

TEST(Model, ModelJson) {
  ModelSpec spec;
  spec.hamiltonian = IsingChainSpec{2, 1.0, 0.0};
  const Model m = build_model(spec);
  const auto j = nlohmann::json::parse(model_to_json(spec, m));
  EXPECT_EQ(j.at("dim").get<int>(), 4);
  EXPECT_TRUE(j.contains("hamiltonian"));
  EXPECT_TRUE(j.contains("perturbation_modular"));
  EXPECT_TRUE(j.contains("log_partition"));
}

TEST(Model, Errors) {
  RandomHermitianSpec big;
  big.dim = 80;
  EXPECT_THROW(build_operator(big), ConfigError);
  EXPECT_THROW(build_operator(IsingChainSpec{7, 1.0, 0.0}), ConfigError);  // 128 > 64
  EXPECT_THROW(build_operator(ZeroSpec{}), ConfigError);
  EXPECT_THROW(build_operator(LocalPauliSpec{2, 2, 'x', 1.0}), ConfigError);
  EXPECT_THROW(build_operator(LocalPauliSpec{2, 0, 'q', 1.0}), ConfigError);
  CMatrix nonherm = CMatrix::Zero(2, 2);
  nonherm(0, 1) = 1.0;
  EXPECT_THROW(build_operator(ExplicitSpec{nonherm}), ConfigError);

  EXPECT_THROW(parse_model_spec(R"({"hamiltonian": {"kind": "explicit", "matrix": [[1, 2]]}})"),
               ConfigError);
  EXPECT_THROW(parse_model_spec(R"({"hamiltonian": {"kind": "explicit", "matrix": [[1, "a"], [1, 1]]}})"),
               ConfigError);
  EXPECT_THROW(parse_model_spec(R"({"hamiltonian": {"kind": "nope"}})"), ConfigError);
  EXPECT_THROW(parse_model_spec(R"({"hamiltonian": {"kind": "zero"}, "extra": 1})"), ConfigError);
  try {
    parse_model_spec(R"({"hamiltonian": {"kind": "random_hermitian", "dim": 80}})");
    FAIL() << "expected ConfigError";
  } catch (const ConfigError& e) {
    EXPECT_NE(std::string(e.what()).find("hamiltonian.dim"), std::string::npos) << e.what();
  }

  ModelSpec hot;
  hot.hamiltonian = IsingChainSpec{2, 100.0, 0.0};
  hot.beta = 10.0;
  EXPECT_THROW(build_model(hot), ConfigError);
}

TEST(Model, KindNames) {
  EXPECT_EQ(kind_name(OperatorSpec{IsingChainSpec{}}), "ising_chain");
  EXPECT_EQ(kind_name(OperatorSpec{LocalPauliSpec{}}), "local_pauli");
  EXPECT_EQ(spec_dim(OperatorSpec{IsingChainSpec{3, 1.0, 0.0}}), Index(8));
  EXPECT_FALSE(spec_dim(OperatorSpec{ZeroSpec{}}).has_value());
}
