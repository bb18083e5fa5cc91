#pragma once

#include <filesystem>
#include <string_view>

#include <nlohmann/json.hpp>

#include "rbench/judger.hpp"
#include "rbench/trust_metrics.hpp"
#include "rbench/weights.hpp"

namespace rbench {

inline constexpr std::string_view kToolVersion = "0.1.0";

inline constexpr const char* kEnvApiKey = "RB_JUDGER_API_KEY";
inline constexpr const char* kEnvUrl = "RB_JUDGER_URL";
inline constexpr const char* kEnvModel = "RB_JUDGER_MODEL";

struct EvalConfig {
  EvalWeights weights;
  JudgerConfig judger;
  TrustFormula trust_formula = TrustFormula::kAlgorithm;
};

/// Snapshot of every setting; the API key is never included.
nlohmann::json config_to_json(const EvalConfig& config);

/// Overlays the fields present in j onto base. Unknown keys are rejected.
EvalConfig config_from_json(const nlohmann::json& j, EvalConfig base = {});

/// Throws FileUnreadable or SchemaViolation.
EvalConfig load_config(const std::filesystem::path& path, EvalConfig base = {});

/// Applies RB_JUDGER_API_KEY, RB_JUDGER_URL and RB_JUDGER_MODEL when set.
void apply_environment(EvalConfig& config);

/// Weight and judger problems combined; empty when usable.
std::vector<std::string> config_problems(const EvalConfig& config);

}  // namespace rbench
