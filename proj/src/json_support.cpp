#include "rbench/json_support.hpp"

#include <fmt/format.h>

#include "rbench/errors.hpp"

namespace rbench {

Rational rational_from_json(const nlohmann::json& j) {
  try {
    if (j.is_number_integer()) return Rational(j.get<std::int64_t>());
    if (j.is_number_float()) return Rational::parse(j.dump());
    if (j.is_string()) return Rational::parse(j.get<std::string>());
  } catch (const std::invalid_argument& e) {
    throw SchemaViolation(fmt::format("bad score value {}: {}", j.dump(), e.what()));
  }
  throw SchemaViolation(fmt::format("expected a score value, got {}", j.dump()));
}

nlohmann::json rational_to_json(const Rational& r) {
  if (r.den() == 1) return r.num();
  return r.to_string();
}

}  // namespace rbench
