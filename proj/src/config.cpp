#include "rbench/config.hpp"

#include <cstdlib>
#include <fstream>
#include <set>

#include <fmt/format.h>

#include "rbench/errors.hpp"

namespace rbench {
namespace {

void reject_unknown(const nlohmann::json& j, const std::set<std::string>& known, std::string_view where) {
  for (const auto& [key, value] : j.items()) {
    if (known.count(key) == 0) throw SchemaViolation(fmt::format("unknown config key '{}' in {}", key, where));
  }
}

template <typename T>
void read_if(const nlohmann::json& j, const char* key, T& target) {
  if (auto it = j.find(key); it != j.end()) target = it->get<T>();
}

}  // namespace

nlohmann::json config_to_json(const EvalConfig& c) {
  const auto& w = c.weights;
  const auto& jc = c.judger;
  return {
      {"weights",
       {{"alpha", w.alpha}, {"beta", w.beta}, {"lambda", w.lambda}, {"mu", w.mu}, {"eta", w.eta},
        {"theta", w.theta}, {"kappa", w.kappa}, {"eps_plus", w.eps_plus}, {"eps_minus", w.eps_minus}}},
      {"judger",
       {{"backend", to_string(jc.backend)},
        {"url", jc.url},
        {"model", jc.model},
        {"temperature", jc.temperature},
        {"max_concurrency", jc.max_concurrency},
        {"retries", jc.retries},
        {"timeout_ms", jc.timeout.count()},
        {"retry_backoff_ms", jc.retry_backoff.count()}}},
      {"trust_formula", to_string(c.trust_formula)},
  };
}

EvalConfig config_from_json(const nlohmann::json& j, EvalConfig base) {
  if (!j.is_object()) throw SchemaViolation("config must be a JSON object");
  try {
    reject_unknown(j, {"weights", "judger", "trust_formula"}, "config");
    if (auto it = j.find("weights"); it != j.end()) {
      reject_unknown(*it, {"alpha", "beta", "lambda", "mu", "eta", "theta", "kappa", "eps_plus", "eps_minus"}, "weights");
      auto& w = base.weights;
      read_if(*it, "alpha", w.alpha);
      read_if(*it, "beta", w.beta);
      read_if(*it, "lambda", w.lambda);
      read_if(*it, "mu", w.mu);
      read_if(*it, "eta", w.eta);
      read_if(*it, "theta", w.theta);
      read_if(*it, "kappa", w.kappa);
      read_if(*it, "eps_plus", w.eps_plus);
      read_if(*it, "eps_minus", w.eps_minus);
    }
    if (auto it = j.find("judger"); it != j.end()) {
      reject_unknown(*it, {"backend", "url", "model", "temperature", "max_concurrency", "retries", "timeout_ms",
                           "retry_backoff_ms"},
                     "judger");
      auto& jc = base.judger;
      if (auto b = it->find("backend"); b != it->end()) jc.backend = parse_backend_kind(b->get<std::string>());
      read_if(*it, "url", jc.url);
      read_if(*it, "model", jc.model);
      read_if(*it, "temperature", jc.temperature);
      read_if(*it, "max_concurrency", jc.max_concurrency);
      read_if(*it, "retries", jc.retries);
      if (auto t = it->find("timeout_ms"); t != it->end()) jc.timeout = std::chrono::milliseconds(t->get<std::int64_t>());
      if (auto t = it->find("retry_backoff_ms"); t != it->end()) {
        jc.retry_backoff = std::chrono::milliseconds(t->get<std::int64_t>());
      }
    }
    if (auto it = j.find("trust_formula"); it != j.end()) base.trust_formula = parse_trust_formula(it->get<std::string>());
  } catch (const nlohmann::json::exception& e) {
    throw SchemaViolation(fmt::format("config: {}", e.what()));
  } catch (const UsageError& e) {
    throw SchemaViolation(fmt::format("config: {}", e.what()));
  }
  return base;
}

EvalConfig load_config(const std::filesystem::path& path, EvalConfig base) {
  std::ifstream in(path);
  if (!in) throw FileUnreadable(fmt::format("cannot read config {}", path.string()));
  nlohmann::json j;
  try {
    j = nlohmann::json::parse(in);
  } catch (const nlohmann::json::exception& e) {
    throw SchemaViolation(fmt::format("config {}: {}", path.string(), e.what()));
  }
  return config_from_json(j, std::move(base));
}

void apply_environment(EvalConfig& config) {
  if (const char* v = std::getenv(kEnvApiKey); v != nullptr && *v != '\0') config.judger.api_key = v;
  if (const char* v = std::getenv(kEnvUrl); v != nullptr && *v != '\0') config.judger.url = v;
  if (const char* v = std::getenv(kEnvModel); v != nullptr && *v != '\0') config.judger.model = v;
}

std::vector<std::string> config_problems(const EvalConfig& config) {
  auto out = config.weights.problems();
  auto more = config.judger.problems();
  out.insert(out.end(), more.begin(), more.end());
  return out;
}

}  // namespace rbench
