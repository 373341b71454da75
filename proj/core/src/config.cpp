#include "kmsperturb/config.hpp"

#include <cerrno>
#include <charconv>
#include <cstdio>
#include <cstdlib>
#include <fstream>
#include <sstream>

#include "json_util.hpp"
#include "kmsperturb/errors.hpp"

namespace kmsperturb::harness {

using detail::field_error;
using detail::get_integer;
using detail::get_number;
using detail::get_string;
using detail::join_path;
using detail::json;
using detail::reject_unknown_keys;
using detail::require_object;

namespace {

int get_int(const json& j, const std::string& path, std::string_view key, int fallback, int lo,
            int hi) {
  const long long v = get_integer(j, path, key, fallback);
  if (v < lo || v > hi)
    field_error(join_path(path, key),
                "must be in [" + std::to_string(lo) + ", " + std::to_string(hi) + "]");
  return static_cast<int>(v);
}

double get_positive(const json& j, const std::string& path, std::string_view key,
                    double fallback) {
  const double v = get_number(j, path, key, fallback);
  if (!(v > 0.0)) field_error(join_path(path, key), "must be > 0");
  return v;
}

std::vector<double> get_positive_list(const json& j, const std::string& path,
                                      std::string_view key, std::vector<double> fallback,
                                      std::size_t min_size) {
  const std::string p = join_path(path, key);
  const auto it = j.find(std::string(key));
  if (it == j.end()) return fallback;
  if (!it->is_array()) field_error(p, "expected an array of numbers");
  std::vector<double> out;
  for (std::size_t i = 0; i < it->size(); ++i) {
    const json& e = (*it)[i];
    if (!e.is_number() || !(e.get<double>() > 0.0))
      field_error(p + "[" + std::to_string(i) + "]", "expected a positive number");
    out.push_back(e.get<double>());
  }
  if (out.size() < min_size)
    field_error(p, "needs at least " + std::to_string(min_size) + " entries");
  return out;
}

kernel::QuadratureScheme parse_scheme(const std::string& s, const std::string& path) {
  if (s == "split_singular") return kernel::QuadratureScheme::split_singular;
  if (s == "double_exponential") return kernel::QuadratureScheme::double_exponential;
  field_error(path, "expected \"split_singular\" or \"double_exponential\"");
}

}  // namespace

std::string_view scheme_name(kernel::QuadratureScheme s) {
  return s == kernel::QuadratureScheme::split_singular ? "split_singular" : "double_exponential";
}

kernel::QuadratureSpec SuiteConfig::quadrature() const {
  return kernel::QuadratureSpec::for_tolerance(quadrature_tolerance, quadrature_nodes_per_unit,
                                               quadrature_scheme);
}

void SuiteConfig::validate() const {
  try {
    flow.validate();
    quadrature().validate();
  } catch (const InvalidArgument& e) {
    throw ConfigError(e.what());
  }
  if (!(model.beta > 0.0)) throw ConfigError("field 'model.beta': must be > 0");
  if (observables < 1) throw ConfigError("field 'observables': must be >= 1");
  if (series.cocycle_order < 0 || series.araki_order < 0)
    throw ConfigError("field 'series': orders must be >= 0");
  if (probes.fd_steps.size() < 2) throw ConfigError("field 'probes.fd_steps': needs two steps");
  if (probes.stability_eps.size() < 2)
    throw ConfigError("field 'probes.stability_eps': needs at least two entries");
}

SuiteConfig parse_config(std::string_view text) {
  const json root = detail::parse_document(text, "config");
  require_object(root, "");
  reject_unknown_keys(root, "",
                      {"seed", "model", "observables", "checks", "tolerance_overrides", "flow",
                       "quadrature", "series", "probes"});
  SuiteConfig cfg;
  {
    const long long seed = get_integer(root, "", "seed", 1);
    if (seed < 0) field_error("seed", "must be non-negative");
    cfg.seed = static_cast<std::uint64_t>(seed);
  }
  if (root.contains("model")) cfg.model = detail::model_spec_from_json(root.at("model"), "model");
  cfg.observables = get_int(root, "", "observables", cfg.observables, 1, 1000);

  if (const auto it = root.find("checks"); it != root.end()) {
    if (it->is_string()) {
      const auto s = it->get<std::string>();
      if (s != "all") field_error("checks", "expected \"all\" or an array of names");
    } else if (it->is_array()) {
      for (std::size_t i = 0; i < it->size(); ++i) {
        const json& e = (*it)[i];
        if (!e.is_string()) field_error("checks[" + std::to_string(i) + "]", "expected a string");
        if (e.get<std::string>() == "all") {
          cfg.checks.clear();
          break;
        }
        cfg.checks.push_back(e.get<std::string>());
      }
    } else {
      field_error("checks", "expected \"all\" or an array of names");
    }
  }

  if (const auto it = root.find("tolerance_overrides"); it != root.end()) {
    require_object(*it, "tolerance_overrides");
    for (const auto& [name, value] : it->items()) {
      if (!value.is_number() || !(value.get<double>() >= 0.0))
        field_error("tolerance_overrides." + name, "expected a non-negative number");
      cfg.tolerance_overrides[name] = value.get<double>();
    }
  }

  if (const auto it = root.find("flow"); it != root.end()) {
    const std::string p = "flow";
    require_object(*it, p);
    reject_unknown_keys(*it, p, {"tolerance", "max_step", "dyson_order"});
    cfg.flow.tolerance = get_positive(*it, p, "tolerance", cfg.flow.tolerance);
    cfg.flow.max_step = get_positive(*it, p, "max_step", cfg.flow.max_step);
    cfg.flow.series_order = get_int(*it, p, "dyson_order", cfg.flow.series_order, 0, 200);
  }

  if (const auto it = root.find("quadrature"); it != root.end()) {
    const std::string p = "quadrature";
    require_object(*it, p);
    reject_unknown_keys(*it, p, {"tolerance", "nodes_per_unit", "scheme"});
    cfg.quadrature_tolerance = get_positive(*it, p, "tolerance", cfg.quadrature_tolerance);
    cfg.quadrature_nodes_per_unit =
        get_int(*it, p, "nodes_per_unit", cfg.quadrature_nodes_per_unit, 1, 4096);
    cfg.quadrature_scheme =
        parse_scheme(get_string(*it, p, "scheme", std::string(scheme_name(cfg.quadrature_scheme))),
                     "quadrature.scheme");
  }

  if (const auto it = root.find("series"); it != root.end()) {
    const std::string p = "series";
    require_object(*it, p);
    reject_unknown_keys(*it, p, {"cocycle_order", "araki_order", "cocycle_time"});
    cfg.series.cocycle_order = get_int(*it, p, "cocycle_order", cfg.series.cocycle_order, 0, 200);
    cfg.series.araki_order = get_int(*it, p, "araki_order", cfg.series.araki_order, 0, 200);
    cfg.series.cocycle_time = get_number(*it, p, "cocycle_time", cfg.series.cocycle_time);
  }

  if (const auto it = root.find("probes"); it != root.end()) {
    const std::string p = "probes";
    require_object(*it, p);
    reject_unknown_keys(*it, p,
                        {"flow_point", "fd_steps", "stability_eps", "pairs", "phi_samples"});
    auto& pr = cfg.probes;
    pr.flow_point = get_number(*it, p, "flow_point", pr.flow_point);
    pr.fd_steps = get_positive_list(*it, p, "fd_steps", pr.fd_steps, 2);
    pr.stability_eps = get_positive_list(*it, p, "stability_eps", pr.stability_eps, 2);
    pr.pairs = get_int(*it, p, "pairs", pr.pairs, 1, 10000);
    pr.phi_samples = get_int(*it, p, "phi_samples", pr.phi_samples, 1, 10000);
  }

  cfg.validate();
  return cfg;
}

SuiteConfig load_config(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw ConfigError("cannot open config file '" + path + "'");
  std::ostringstream ss;
  ss << in.rdbuf();
  try {
    return parse_config(ss.str());
  } catch (const ConfigError& e) {
    throw ConfigError(path + ": " + e.what());
  }
}

std::string config_to_json(const SuiteConfig& cfg) {
  json j;
  j["seed"] = cfg.seed;
  j["model"] = detail::model_spec_json(cfg.model);
  j["observables"] = cfg.observables;
  j["checks"] = cfg.checks.empty() ? json("all") : json(cfg.checks);
  j["tolerance_overrides"] = json::object();
  for (const auto& [k, v] : cfg.tolerance_overrides) j["tolerance_overrides"][k] = v;
  j["flow"] = {{"tolerance", cfg.flow.tolerance},
               {"max_step", cfg.flow.max_step},
               {"dyson_order", cfg.flow.series_order}};
  j["quadrature"] = {{"tolerance", cfg.quadrature_tolerance},
                     {"nodes_per_unit", cfg.quadrature_nodes_per_unit},
                     {"scheme", std::string(scheme_name(cfg.quadrature_scheme))}};
  j["series"] = {{"cocycle_order", cfg.series.cocycle_order},
                 {"araki_order", cfg.series.araki_order},
                 {"cocycle_time", cfg.series.cocycle_time}};
  j["probes"] = {{"flow_point", cfg.probes.flow_point},
                 {"fd_steps", cfg.probes.fd_steps},
                 {"stability_eps", cfg.probes.stability_eps},
                 {"pairs", cfg.probes.pairs},
                 {"phi_samples", cfg.probes.phi_samples}};
  return j.dump();
}

std::string config_hash(const SuiteConfig& cfg) {
  std::uint64_t h = 0xcbf29ce484222325ULL;
  for (const unsigned char c : config_to_json(cfg)) {
    h ^= c;
    h *= 0x100000001b3ULL;
  }
  char buf[17];
  std::snprintf(buf, sizeof buf, "%016llx", static_cast<unsigned long long>(h));
  return buf;
}

std::uint64_t parse_seed(std::string_view text, std::string_view origin) {
  std::uint64_t v = 0;
  const auto [ptr, ec] = std::from_chars(text.data(), text.data() + text.size(), v);
  if (text.empty() || ec != std::errc() || ptr != text.data() + text.size())
    throw ConfigError(std::string(origin) + ": invalid seed '" + std::string(text) +
                      "' (expected a non-negative integer)");
  return v;
}

void apply_seed_override(SuiteConfig& cfg, std::optional<std::uint64_t> flag_seed) {
  if (flag_seed) {
    cfg.seed = *flag_seed;
    return;
  }
  if (const char* env = std::getenv("KMSPERTURB_SEED"); env != nullptr && *env != '\0')
    cfg.seed = parse_seed(env, "KMSPERTURB_SEED");
}

}  // namespace kmsperturb::harness
