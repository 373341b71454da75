#include "json_util.hpp"

#include <cmath>
#include <cstdio>
#include <limits>

#include "kmsperturb/errors.hpp"

namespace kmsperturb::harness::detail {

namespace {

std::string location(std::string_view text, std::size_t byte) {
  byte = std::min(byte, text.size());
  std::size_t line = 1, column = 1;
  for (std::size_t i = 0; i < byte; ++i) {
    if (text[i] == '\n') {
      ++line;
      column = 1;
    } else {
      ++column;
    }
  }
  return "line " + std::to_string(line) + ", column " + std::to_string(column);
}

const json* find(const json& obj, std::string_view key) {
  const auto it = obj.find(std::string(key));
  return it == obj.end() ? nullptr : &*it;
}

}  // namespace

void field_error(const std::string& path, const std::string& message) {
  throw ConfigError("field '" + path + "': " + message);
}

json parse_document(std::string_view text, std::string_view what) {
  try {
    return json::parse(text.begin(), text.end());
  } catch (const json::parse_error& e) {
    // nlohmann reports the byte just past the offending token.
    const std::size_t at = e.byte > 0 ? e.byte - 1 : 0;
    // Keep only the reason; the location is recomputed from the byte offset.
    std::string msg = e.what();
    if (const auto p = msg.find(": syntax error"); p != std::string::npos) msg = msg.substr(p + 2);
    throw ConfigError(std::string(what) + ": " + location(text, at) + ": " + msg);
  }
}

std::string join_path(const std::string& parent, std::string_view key) {
  return parent.empty() ? std::string(key) : parent + "." + std::string(key);
}

const json& require_object(const json& j, const std::string& path) {
  if (!j.is_object()) field_error(path.empty() ? "<root>" : path, "expected an object");
  return j;
}

void reject_unknown_keys(const json& obj, const std::string& path,
                         std::initializer_list<std::string_view> allowed) {
  for (const auto& [key, value] : obj.items()) {
    bool ok = false;
    for (auto a : allowed) ok = ok || key == a;
    if (!ok) field_error(join_path(path, key), "unknown key");
  }
}

double get_number(const json& obj, const std::string& path, std::string_view key,
                  std::optional<double> fallback) {
  const json* v = find(obj, key);
  const std::string p = join_path(path, key);
  if (!v) {
    if (!fallback) field_error(p, "missing required number");
    return *fallback;
  }
  if (!v->is_number()) field_error(p, "expected a number, got " + std::string(v->type_name()));
  const double x = v->get<double>();
  if (!std::isfinite(x)) field_error(p, "must be finite");
  return x;
}

long long get_integer(const json& obj, const std::string& path, std::string_view key,
                      std::optional<long long> fallback) {
  const json* v = find(obj, key);
  const std::string p = join_path(path, key);
  if (!v) {
    if (!fallback) field_error(p, "missing required integer");
    return *fallback;
  }
  if (v->is_number_unsigned()) {
    const auto u = v->get<unsigned long long>();
    if (u > static_cast<unsigned long long>(std::numeric_limits<long long>::max()))
      field_error(p, "integer out of range");
    return static_cast<long long>(u);
  }
  if (!v->is_number_integer()) field_error(p, "expected an integer, got " + std::string(v->type_name()));
  return v->get<long long>();
}

std::string get_string(const json& obj, const std::string& path, std::string_view key,
                       std::optional<std::string> fallback) {
  const json* v = find(obj, key);
  const std::string p = join_path(path, key);
  if (!v) {
    if (!fallback) field_error(p, "missing required string");
    return *fallback;
  }
  if (!v->is_string()) field_error(p, "expected a string, got " + std::string(v->type_name()));
  return v->get<std::string>();
}

json matrix_to_json(const linalg::CMatrix& m) {
  json rows = json::array();
  for (linalg::Index i = 0; i < m.rows(); ++i) {
    json row = json::array();
    for (linalg::Index j = 0; j < m.cols(); ++j) row.push_back({m(i, j).real(), m(i, j).imag()});
    rows.push_back(std::move(row));
  }
  return rows;
}

linalg::CMatrix matrix_from_json(const json& j, const std::string& path) {
  if (!j.is_array() || j.empty()) field_error(path, "expected a non-empty array of rows");
  const auto n = static_cast<linalg::Index>(j.size());
  linalg::CMatrix m(n, n);
  for (linalg::Index i = 0; i < n; ++i) {
    const json& row = j[static_cast<std::size_t>(i)];
    const std::string rp = path + "[" + std::to_string(i) + "]";
    if (!row.is_array() || static_cast<linalg::Index>(row.size()) != n)
      field_error(rp, "expected a row of " + std::to_string(n) + " entries (square matrix)");
    for (linalg::Index k = 0; k < n; ++k) {
      const json& e = row[static_cast<std::size_t>(k)];
      const std::string ep = rp + "[" + std::to_string(k) + "]";
      if (e.is_number()) {
        m(i, k) = {e.get<double>(), 0.0};
      } else if (e.is_array() && e.size() == 2 && e[0].is_number() && e[1].is_number()) {
        m(i, k) = {e[0].get<double>(), e[1].get<double>()};
      } else {
        field_error(ep, "expected a [re, im] pair");
      }
      if (!std::isfinite(m(i, k).real()) || !std::isfinite(m(i, k).imag()))
        field_error(ep, "must be finite");
    }
  }
  return m;
}

std::string exact_decimal(double x) {
  if (std::isnan(x)) return "nan";
  if (std::isinf(x)) return x > 0 ? "inf" : "-inf";
  char buf[40];
  std::snprintf(buf, sizeof buf, "%.17g", x);
  return buf;
}

std::string scientific(double x, int digits) {
  if (std::isnan(x)) return "nan";
  if (std::isinf(x)) return x > 0 ? "inf" : "-inf";
  char buf[48];
  std::snprintf(buf, sizeof buf, "%.*e", digits, x);
  return buf;
}

}  // namespace kmsperturb::harness::detail
