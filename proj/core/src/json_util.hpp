#pragma once

#include <initializer_list>
#include <optional>
#include <string>
#include <string_view>

#include <json.hpp>

#include "kmsperturb/model.hpp"

namespace kmsperturb::harness::detail {

using nlohmann::json;

[[noreturn]] void field_error(const std::string& path, const std::string& message);

/// Parses text, turning syntax errors into ConfigError with line and column.
json parse_document(std::string_view text, std::string_view what);

std::string join_path(const std::string& parent, std::string_view key);

const json& require_object(const json& j, const std::string& path);
void reject_unknown_keys(const json& obj, const std::string& path,
                         std::initializer_list<std::string_view> allowed);

double get_number(const json& obj, const std::string& path, std::string_view key,
                  std::optional<double> fallback = std::nullopt);
long long get_integer(const json& obj, const std::string& path, std::string_view key,
                      std::optional<long long> fallback = std::nullopt);
std::string get_string(const json& obj, const std::string& path, std::string_view key,
                       std::optional<std::string> fallback = std::nullopt);

/// Matrices are nested arrays of [re, im] pairs, row by row.
json matrix_to_json(const linalg::CMatrix& m);
linalg::CMatrix matrix_from_json(const json& j, const std::string& path);

/// Shortest text that parses back to the same double ("%.17g"); non-finite
/// values become "inf", "-inf" or "nan".
std::string exact_decimal(double x);
/// Fixed-width scientific text, "%.{digits}e".
std::string scientific(double x, int digits);

ModelSpec model_spec_from_json(const json& j, const std::string& path);
json model_spec_json(const ModelSpec& spec);

}  // namespace kmsperturb::harness::detail
