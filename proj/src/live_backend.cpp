#include <httplib.h>

#include <fmt/format.h>
#include <nlohmann/json.hpp>

#include "rbench/errors.hpp"
#include "rbench/judger.hpp"

namespace rbench {

LiveBackend::LiveBackend(JudgerConfig config) : config_(std::move(config)) {
  auto sep = config_.url.find("://");
  if (config_.url.empty() || sep == std::string::npos) {
    throw UsageError(fmt::format("judger endpoint '{}' is not an http(s) URL", config_.url));
  }
  std::string scheme = config_.url.substr(0, sep);
  if (scheme != "http" && scheme != "https") {
    throw UsageError(fmt::format("judger endpoint '{}' is not an http(s) URL", config_.url));
  }
  auto path_start = config_.url.find('/', sep + 3);
  origin_ = config_.url.substr(0, path_start);
  path_ = path_start == std::string::npos ? "/" : config_.url.substr(path_start);
}

std::string LiveBackend::complete(const JudgeRequest& request) {
  nlohmann::json body = {
      {"model", config_.model},
      {"temperature", config_.temperature},
      {"messages", nlohmann::json::array({{{"role", "user"}, {"content", request.prompt}}})},
  };

  // One client per call keeps the backend free of shared mutable state.
  httplib::Client client(origin_);
  client.set_connection_timeout(config_.timeout);
  client.set_read_timeout(config_.timeout);
  client.set_write_timeout(config_.timeout);
  httplib::Headers headers;
  if (!config_.api_key.empty()) headers.emplace("Authorization", "Bearer " + config_.api_key);

  auto res = client.Post(path_, headers, body.dump(-1, ' ', false, nlohmann::json::error_handler_t::replace),
                         "application/json");
  if (!res) {
    throw TransportError(fmt::format("judger request to {} failed: {}", origin_, httplib::to_string(res.error())));
  }
  if (res->status != 200) {
    throw TransportError(fmt::format("judger returned HTTP {}: {}", res->status, res->body.substr(0, 200)));
  }
  try {
    auto reply = nlohmann::json::parse(res->body);
    return reply.at("choices").at(0).at("message").at("content").get<std::string>();
  } catch (const nlohmann::json::exception& e) {
    throw TransportError(fmt::format("judger reply is not a chat completion: {}", e.what()));
  }
}

}  // namespace rbench
