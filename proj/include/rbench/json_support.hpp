#pragma once

#include <nlohmann/json.hpp>

#include "rbench/rational.hpp"

namespace rbench {

/// Accepts a JSON integer, a decimal literal (read exactly from its shortest
/// textual form) or a string such as "3/2". Throws SchemaViolation otherwise.
Rational rational_from_json(const nlohmann::json& j);

/// Integers serialize as JSON numbers, other values as "n/d" strings.
nlohmann::json rational_to_json(const Rational& r);

}  // namespace rbench
