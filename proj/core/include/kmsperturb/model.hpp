#pragma once

#include <cstdint>
#include <optional>
#include <string>
#include <string_view>
#include <variant>

#include "kmsperturb/gns.hpp"

namespace kmsperturb::harness {

using linalg::CMatrix;
using linalg::HermMatrix;
using linalg::Index;

inline constexpr Index kMaxDim = 64;

/// Complex Gaussian entries, symmetrized and rescaled to op_norm = norm_scale.
/// A missing dim or seed is filled in by build_model.
struct RandomHermitianSpec {
  std::optional<int> dim;
  std::optional<std::uint64_t> seed;
  double norm_scale = 1.0;
};

/// H = -J sum_i Z_i Z_{i+1} - g sum_i X_i, open boundary.
struct IsingChainSpec {
  int sites = 2;
  double coupling = 1.0;
  double field = 0.0;
};

/// H = J sum_i (X_i X_{i+1} + Y_i Y_{i+1} + Z_i Z_{i+1}), open boundary.
struct HeisenbergChainSpec {
  int sites = 2;
  double coupling = 1.0;
};

struct ExplicitSpec {
  CMatrix matrix;
};

/// strength * P_site on a chain of `sites` qubits; site 0 is the leftmost
/// tensor factor.
struct LocalPauliSpec {
  int sites = 1;
  int site = 0;
  char pauli = 'z';
  double strength = 1.0;
};

struct ZeroSpec {};

using OperatorSpec = std::variant<RandomHermitianSpec, IsingChainSpec, HeisenbergChainSpec,
                                  ExplicitSpec, LocalPauliSpec, ZeroSpec>;

/// How the perturbation is read: `modular` is V itself, `physical` is
/// V_phys with V = -beta V_phys.
enum class Convention { modular, physical };

struct PerturbationSpec {
  OperatorSpec op = ZeroSpec{};
  Convention convention = Convention::modular;
};

struct ModelSpec {
  OperatorSpec hamiltonian = RandomHermitianSpec{3, std::nullopt, 1.0};
  double beta = 1.0;
  PerturbationSpec perturbation;
};

struct Model {
  gns::GibbsSystem sys;
  /// Modular perturbation V.
  HermMatrix v;
  /// The perturbation as configured (V_phys for the physical convention).
  HermMatrix v_input;
};

/// Builds an operator.  `dim` fills in a missing dimension (required for
/// ZeroSpec) and `seed` a missing random seed.  Throws ConfigError for invalid
/// parameters or dim > kMaxDim.
HermMatrix build_operator(const OperatorSpec& spec, std::optional<Index> dim = std::nullopt,
                          std::uint64_t seed = 0);

/// Deterministic in (spec, seed).  Random operators without an explicit seed
/// draw from streams derived from `seed`: the Hamiltonian from seed itself,
/// the perturbation from derive_seed(seed, 1).
Model build_model(const ModelSpec& spec, std::uint64_t seed = 0);

/// splitmix64 of seed + stream * golden ratio; used for all derived streams.
std::uint64_t derive_seed(std::uint64_t seed, std::uint64_t stream);

/// Pauli string operator on a chain, e.g. ("xz", 3 sites, first site 0) -> X⊗Z⊗I.
CMatrix pauli_product(int sites, int first_site, std::string_view paulis);

std::string_view kind_name(const OperatorSpec& spec);

/// Parses {"hamiltonian": {...}, "beta": b, "perturbation": {...}}.
ModelSpec parse_model_spec(std::string_view json_text);
std::string model_spec_to_json(const ModelSpec& spec);

std::optional<Index> spec_dim(const OperatorSpec& spec);

/// The built model: spec echo, dim, beta, H, V, log Z.
std::string model_to_json(const ModelSpec& spec, const Model& model);

}  // namespace kmsperturb::harness
