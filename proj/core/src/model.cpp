#include "kmsperturb/model.hpp"

#include <cmath>

#include "json_util.hpp"
#include "kmsperturb/errors.hpp"
#include "kmsperturb/random.hpp"

namespace kmsperturb::harness {

namespace {

using detail::json;

template <class... Ts>
struct Overloaded : Ts... {
  using Ts::operator()...;
};
template <class... Ts>
Overloaded(Ts...) -> Overloaded<Ts...>;

CMatrix pauli(char p) {
  using namespace std::complex_literals;
  CMatrix m(2, 2);
  switch (p) {
    case 'i': case 'I': m << 1, 0, 0, 1; break;
    case 'x': case 'X': m << 0, 1, 1, 0; break;
    case 'y': case 'Y': m << 0, -1i, 1i, 0; break;
    case 'z': case 'Z': m << 1, 0, 0, -1; break;
    default: throw ConfigError(std::string("unknown Pauli label '") + p + "'");
  }
  return m;
}

CMatrix kron(const CMatrix& a, const CMatrix& b) {
  CMatrix out(a.rows() * b.rows(), a.cols() * b.cols());
  for (Index i = 0; i < a.rows(); ++i)
    for (Index j = 0; j < a.cols(); ++j)
      out.block(i * b.rows(), j * b.cols(), b.rows(), b.cols()) = a(i, j) * b;
  return out;
}

void check_sites(int sites, const char* kind) {
  if (sites < 1 || (Index{1} << std::min(sites, 30)) > kMaxDim)
    throw ConfigError(std::string(kind) + ": sites must be in [1, " +
                      std::to_string(static_cast<int>(std::log2(kMaxDim))) + "]");
}

Index checked_dim(long long d, const char* kind) {
  if (d < 1 || d > kMaxDim)
    throw ConfigError(std::string(kind) + ": dimension " + std::to_string(d) +
                      " outside [1, " + std::to_string(kMaxDim) + "]");
  return static_cast<Index>(d);
}

void check_finite(double x, const char* what) {
  if (!std::isfinite(x)) throw ConfigError(std::string(what) + " must be finite");
}

}  // namespace

std::uint64_t derive_seed(std::uint64_t seed, std::uint64_t stream) {
  std::uint64_t z = seed + stream * 0x9e3779b97f4a7c15ULL;
  z = (z ^ (z >> 30)) * 0xbf58476d1ce4e5b9ULL;
  z = (z ^ (z >> 27)) * 0x94d049bb133111ebULL;
  return z ^ (z >> 31);
}

CMatrix pauli_product(int sites, int first_site, std::string_view paulis) {
  check_sites(sites, "pauli_product");
  if (first_site < 0 || first_site + static_cast<int>(paulis.size()) > sites)
    throw ConfigError("Pauli string does not fit on the chain: site " +
                      std::to_string(first_site) + ", length " + std::to_string(paulis.size()) +
                      ", sites " + std::to_string(sites));
  CMatrix out = CMatrix::Identity(1, 1);
  for (int k = 0; k < sites; ++k) {
    const int rel = k - first_site;
    const char p = (rel >= 0 && rel < static_cast<int>(paulis.size())) ? paulis[rel] : 'i';
    out = kron(out, pauli(p));
  }
  return out;
}

std::optional<Index> spec_dim(const OperatorSpec& spec) {
  return std::visit(
      Overloaded{
          [](const RandomHermitianSpec& s) -> std::optional<Index> {
            if (s.dim) return *s.dim;
            return std::nullopt;
          },
          [](const IsingChainSpec& s) -> std::optional<Index> { return Index{1} << s.sites; },
          [](const HeisenbergChainSpec& s) -> std::optional<Index> { return Index{1} << s.sites; },
          [](const ExplicitSpec& s) -> std::optional<Index> { return s.matrix.rows(); },
          [](const LocalPauliSpec& s) -> std::optional<Index> { return Index{1} << s.sites; },
          [](const ZeroSpec&) -> std::optional<Index> { return std::nullopt; },
      },
      spec);
}

std::string_view kind_name(const OperatorSpec& spec) {
  return std::visit(Overloaded{
                        [](const RandomHermitianSpec&) { return std::string_view("random_hermitian"); },
                        [](const IsingChainSpec&) { return std::string_view("ising_chain"); },
                        [](const HeisenbergChainSpec&) { return std::string_view("heisenberg_chain"); },
                        [](const ExplicitSpec&) { return std::string_view("explicit"); },
                        [](const LocalPauliSpec&) { return std::string_view("local_pauli"); },
                        [](const ZeroSpec&) { return std::string_view("zero"); },
                    },
                    spec);
}

HermMatrix build_operator(const OperatorSpec& spec, std::optional<Index> dim, std::uint64_t seed) {
  return std::visit(
      Overloaded{
          [&](const RandomHermitianSpec& s) {
            const auto d = s.dim ? std::optional<Index>(*s.dim) : dim;
            if (!d) throw ConfigError("random_hermitian: dim is required");
            check_finite(s.norm_scale, "random_hermitian.norm_scale");
            if (s.norm_scale < 0.0) throw ConfigError("random_hermitian: norm_scale must be >= 0");
            Rng rng(s.seed.value_or(seed));
            return random_hermitian(checked_dim(*d, "random_hermitian"), s.norm_scale, rng);
          },
          [](const IsingChainSpec& s) {
            check_sites(s.sites, "ising_chain");
            check_finite(s.coupling, "ising_chain.J");
            check_finite(s.field, "ising_chain.g");
            const Index d = Index{1} << s.sites;
            CMatrix h = CMatrix::Zero(d, d);
            for (int i = 0; i + 1 < s.sites; ++i) h -= s.coupling * pauli_product(s.sites, i, "zz");
            for (int i = 0; i < s.sites; ++i) h -= s.field * pauli_product(s.sites, i, "x");
            return HermMatrix(h);
          },
          [](const HeisenbergChainSpec& s) {
            check_sites(s.sites, "heisenberg_chain");
            check_finite(s.coupling, "heisenberg_chain.J");
            const Index d = Index{1} << s.sites;
            CMatrix h = CMatrix::Zero(d, d);
            for (int i = 0; i + 1 < s.sites; ++i)
              for (const char* p : {"xx", "yy", "zz"}) h += s.coupling * pauli_product(s.sites, i, p);
            return HermMatrix(h);
          },
          [](const ExplicitSpec& s) {
            if (s.matrix.rows() != s.matrix.cols())
              throw ConfigError("explicit: matrix must be square");
            checked_dim(s.matrix.rows(), "explicit");
            try {
              return HermMatrix(s.matrix);
            } catch (const NonHermitianError& e) {
              throw ConfigError(std::string("explicit: ") + e.what());
            }
          },
          [](const LocalPauliSpec& s) {
            check_sites(s.sites, "local_pauli");
            check_finite(s.strength, "local_pauli.strength");
            if (s.site < 0 || s.site >= s.sites)
              throw ConfigError("local_pauli: site " + std::to_string(s.site) + " outside [0, " +
                                std::to_string(s.sites - 1) + "]");
            return HermMatrix(s.strength * pauli_product(s.sites, s.site, std::string(1, s.pauli)));
          },
          [&](const ZeroSpec&) {
            if (!dim) throw ConfigError("zero operator: dimension unknown");
            return HermMatrix::zero(checked_dim(*dim, "zero"));
          },
      },
      spec);
}

Model build_model(const ModelSpec& spec, std::uint64_t seed) {
  if (!(spec.beta > 0.0) || !std::isfinite(spec.beta))
    throw ConfigError("beta must be a finite positive number");
  HermMatrix h = build_operator(spec.hamiltonian, std::nullopt, seed);
  const Index d = h.dim();
  HermMatrix v_in = build_operator(spec.perturbation.op, d, derive_seed(seed, 1));
  if (v_in.dim() != d)
    throw ConfigError("perturbation dimension " + std::to_string(v_in.dim()) +
                      " does not match hamiltonian dimension " + std::to_string(d));
  HermMatrix v = spec.perturbation.convention == Convention::physical ? v_in * (-spec.beta) : v_in;
  try {
    auto sys = gns::build_gibbs(h, spec.beta);
    // The perturbed exponent must stay representable as well.
    (void)sys.perturbed_spectrum(v);
    return Model{std::move(sys), std::move(v), std::move(v_in)};
  } catch (const OverflowError& e) {
    throw ConfigError(std::string("model not representable in double precision: ") + e.what());
  }
}

// ---------------------------------------------------------------------------
// JSON

namespace {

OperatorSpec operator_from_json(const json& j, const std::string& path, bool perturbation) {
  using namespace detail;
  require_object(j, path);
  const std::string kind = get_string(j, path, "kind");
  auto allow = [&](std::initializer_list<std::string_view> keys) {
    std::vector<std::string_view> all(keys);
    all.push_back("kind");
    if (perturbation) all.push_back("convention");
    for (const auto& [key, value] : j.items()) {
      bool ok = false;
      for (auto a : all) ok = ok || key == a;
      if (!ok) field_error(join_path(path, key), "unknown key for kind '" + kind + "'");
    }
  };
  auto int_field = [&](std::string_view key, std::optional<long long> fb = std::nullopt) {
    const long long v = get_integer(j, path, key, fb);
    if (v < std::numeric_limits<int>::min() || v > std::numeric_limits<int>::max())
      field_error(join_path(path, key), "integer out of range");
    return static_cast<int>(v);
  };

  if (kind == "random_hermitian") {
    allow({"dim", "seed", "norm_scale"});
    RandomHermitianSpec s;
    if (j.contains("dim")) s.dim = int_field("dim");
    if (j.contains("seed")) {
      const long long seed = get_integer(j, path, "seed");
      if (seed < 0) field_error(join_path(path, "seed"), "must be non-negative");
      s.seed = static_cast<std::uint64_t>(seed);
    }
    s.norm_scale = get_number(j, path, "norm_scale", 1.0);
    if (s.dim && (*s.dim < 1 || *s.dim > kMaxDim))
      field_error(join_path(path, "dim"), "must be in [1, " + std::to_string(kMaxDim) + "]");
    if (s.norm_scale < 0.0) field_error(join_path(path, "norm_scale"), "must be >= 0");
    return s;
  }
  if (kind == "ising_chain") {
    allow({"sites", "J", "g"});
    return IsingChainSpec{int_field("sites"), get_number(j, path, "J", 1.0),
                          get_number(j, path, "g", 0.0)};
  }
  if (kind == "heisenberg_chain") {
    allow({"sites", "J"});
    return HeisenbergChainSpec{int_field("sites"), get_number(j, path, "J", 1.0)};
  }
  if (kind == "explicit") {
    allow({"matrix"});
    if (!j.contains("matrix")) field_error(join_path(path, "matrix"), "missing matrix literal");
    const std::string mp = join_path(path, "matrix");
    const CMatrix m = matrix_from_json(j.at("matrix"), mp);
    if (m.rows() > kMaxDim) field_error(mp, "dimension exceeds " + std::to_string(kMaxDim));
    const double asym = linalg::hermitian_asymmetry(m);
    const double scale = std::max(1.0, m.cwiseAbs().maxCoeff());
    if (asym > linalg::kHermitianTolerance * scale)
      field_error(mp, "matrix is not Hermitian (asymmetry " + exact_decimal(asym) + ")");
    return ExplicitSpec{m};
  }
  if (kind == "local_pauli") {
    allow({"sites", "site", "pauli", "strength"});
    const std::string p = get_string(j, path, "pauli");
    if (p.size() != 1 || std::string_view("xyzXYZ").find(p[0]) == std::string_view::npos)
      field_error(join_path(path, "pauli"), "expected one of \"x\", \"y\", \"z\"");
    LocalPauliSpec s{int_field("sites"), int_field("site"),
                     static_cast<char>(std::tolower(static_cast<unsigned char>(p[0]))),
                     get_number(j, path, "strength", 1.0)};
    if (s.site < 0 || s.site >= s.sites)
      field_error(join_path(path, "site"), "must be in [0, sites - 1] (0 is the leftmost site)");
    return s;
  }
  if (kind == "zero") {
    allow({});
    return ZeroSpec{};
  }
  field_error(join_path(path, "kind"),
              "unknown kind '" + kind +
                  "' (expected random_hermitian, ising_chain, heisenberg_chain, explicit, "
                  "local_pauli or zero)");
}

json operator_to_json(const OperatorSpec& spec) {
  json j;
  j["kind"] = std::string(kind_name(spec));
  std::visit(Overloaded{
                 [&](const RandomHermitianSpec& s) {
                   if (s.dim) j["dim"] = *s.dim;
                   if (s.seed) j["seed"] = *s.seed;
                   j["norm_scale"] = s.norm_scale;
                 },
                 [&](const IsingChainSpec& s) {
                   j["sites"] = s.sites;
                   j["J"] = s.coupling;
                   j["g"] = s.field;
                 },
                 [&](const HeisenbergChainSpec& s) {
                   j["sites"] = s.sites;
                   j["J"] = s.coupling;
                 },
                 [&](const ExplicitSpec& s) { j["matrix"] = detail::matrix_to_json(s.matrix); },
                 [&](const LocalPauliSpec& s) {
                   j["sites"] = s.sites;
                   j["site"] = s.site;
                   j["pauli"] = std::string(1, s.pauli);
                   j["strength"] = s.strength;
                 },
                 [](const ZeroSpec&) {},
             },
             spec);
  return j;
}

}  // namespace

namespace detail {

ModelSpec model_spec_from_json(const json& j, const std::string& path) {
  require_object(j, path);
  reject_unknown_keys(j, path, {"hamiltonian", "beta", "perturbation"});
  ModelSpec spec;
  if (!j.contains("hamiltonian")) field_error(join_path(path, "hamiltonian"), "missing");
  spec.hamiltonian = operator_from_json(j.at("hamiltonian"), join_path(path, "hamiltonian"), false);
  spec.beta = get_number(j, path, "beta", 1.0);
  if (!(spec.beta > 0.0)) field_error(join_path(path, "beta"), "must be > 0");
  if (j.contains("perturbation")) {
    const std::string pp = join_path(path, "perturbation");
    const json& pj = j.at("perturbation");
    spec.perturbation.op = operator_from_json(pj, pp, true);
    const std::string conv = get_string(pj, pp, "convention", "modular");
    if (conv == "modular") {
      spec.perturbation.convention = Convention::modular;
    } else if (conv == "physical") {
      spec.perturbation.convention = Convention::physical;
    } else {
      field_error(join_path(pp, "convention"), "expected \"modular\" or \"physical\"");
    }
  }
  const auto hd = spec_dim(spec.hamiltonian);
  if (!hd) field_error(join_path(path, "hamiltonian"), "dimension cannot be inferred");
  if (*hd > kMaxDim)
    field_error(join_path(path, "hamiltonian"), "dimension exceeds " + std::to_string(kMaxDim));
  if (const auto pd = spec_dim(spec.perturbation.op); pd && *pd != *hd)
    field_error(join_path(path, "perturbation"),
                "dimension " + std::to_string(*pd) + " does not match hamiltonian dimension " +
                    std::to_string(*hd));
  return spec;
}

json model_spec_json(const ModelSpec& spec) {
  json j;
  j["hamiltonian"] = operator_to_json(spec.hamiltonian);
  j["beta"] = spec.beta;
  json p = operator_to_json(spec.perturbation.op);
  p["convention"] = spec.perturbation.convention == Convention::physical ? "physical" : "modular";
  j["perturbation"] = std::move(p);
  return j;
}

}  // namespace detail

ModelSpec parse_model_spec(std::string_view json_text) {
  return detail::model_spec_from_json(detail::parse_document(json_text, "model spec"), "");
}

std::string model_spec_to_json(const ModelSpec& spec) {
  return detail::model_spec_json(spec).dump(2);
}

std::string model_to_json(const ModelSpec& spec, const Model& model) {
  json j;
  j["schema_version"] = 1;
  j["spec"] = detail::model_spec_json(spec);
  j["dim"] = model.sys.dim();
  j["beta"] = model.sys.beta();
  j["log_partition"] = detail::exact_decimal(model.sys.log_partition());
  j["hamiltonian"] = detail::matrix_to_json(model.sys.hamiltonian().mat());
  j["perturbation_input"] = detail::matrix_to_json(model.v_input.mat());
  j["perturbation_modular"] = detail::matrix_to_json(model.v.mat());
  json ev = json::array();
  const auto spec_h = linalg::herm_eig(model.sys.hamiltonian());
  for (Index i = 0; i < spec_h.dim(); ++i) ev.push_back(detail::exact_decimal(spec_h.eigenvalues(i)));
  j["hamiltonian_spectrum"] = std::move(ev);
  return j.dump(2) + "\n";
}

}  // namespace kmsperturb::harness
