#include "rbench/judger.hpp"

#include <algorithm>
#include <array>
#include <atomic>
#include <thread>

#include <fmt/chrono.h>
#include <fmt/format.h>
#include <nlohmann/json.hpp>

#include "rbench/errors.hpp"
#include "rbench/json_support.hpp"

namespace rbench {
namespace {

constexpr std::string_view kRubricPromptHead =
    "You are a scoring evaluator tasked with assessing the quality of a report generated by a deep research "
    "model. You will be provided with:\n"
    "  1. A report text\n"
    "  2. An evaluation rule containing specific scoring criteria and allowed score values\n"
    "Your task is to:\n"
    "  - Carefully read the report\n"
    "  - Evaluate it strictly against the given rule\n"
    "  - Assign a score based only on the score values defined in the rule\n"
    "Scoring instructions:\n"
    "  - Only use the score values explicitly listed in the rule\n"
    "  - Do not invent intermediate scores or alternative formats\n"
    "  - Your output must begin with the score in square brackets [], followed by a one-sentence reason\n"
    "Output format example:\n"
    "  [0] No citations were provided, which violates the requirement.\n"
    "  [2] The report fully meets the requirement with clear and relevant details.\n"
    "Be objective and consistent. Focus on clarity, completeness, relevance, and adherence to the rule.\n"
    "Report text: ";

constexpr std::string_view kRelevancePromptHead =
    "You are a scoring evaluator tasked with assessing the relevance of a specific keyword within a research "
    "report. You will be provided with:\n"
    "  1. A report text\n"
    "  2. A keyword to evaluate\n"
    "Your task is to:\n"
    "  - Read the report carefully\n"
    "  - Judge how semantically relevant the keyword is to the report\n"
    "  - Consider not just frequency, but depth of discussion, thematic importance, and contextual integration\n"
    "Use the following 5-point relevance scale:\n"
    "  (5) Extremely Relevant: The keyword is a central theme of the report; It appears multiple times and is "
    "discussed in depth; The report’s main arguments or findings revolve around it;\n"
    "  (4) Highly Relevant: The keyword is a major topic; It appears more than once and is clearly explained or "
    "referenced; contributes directly to the report’s purpose;\n"
    "  (3) Moderately Relevant: The keyword is mentioned but not emphasized; It may appear once or twice; It "
    "supports the report contextually but is not a focus;\n"
    "  (2) Slightly Relevant: The keyword is briefly mentioned; It has little impact on the report’s core "
    "content; It may be incidental or peripheral;\n"
    "  (1) Not Relevant: The keyword does not appear in the report; Or it appears in a way that is unrelated to "
    "the report’s topic.\n"
    "Output format example:\n"
    "  [4] The keyword \"QUIC\" is referenced multiple times in the report, particularly in the context of "
    "protocol evolution and RFC publication. While not the sole focus, it is clearly a major topic.\n"
    "Be objective and consistent. Focus on clarity, completeness, relevance, and adherence to the rule.\n"
    "Report text: ";

constexpr std::string_view kRuleLabel = "\nRule: ";
constexpr std::string_view kKeywordLabel = "\nKeyword: ";

const std::array<Rational, 5> kRelevanceScale = {Rational(1), Rational(2), Rational(3), Rational(4), Rational(5)};

std::string_view trim_left(std::string_view s) {
  while (!s.empty() && (s.front() == ' ' || s.front() == '\t' || s.front() == '\n' || s.front() == '\r')) {
    s.remove_prefix(1);
  }
  return s;
}

std::string_view trim(std::string_view s) {
  s = trim_left(s);
  while (!s.empty() && (s.back() == ' ' || s.back() == '\t' || s.back() == '\n' || s.back() == '\r')) {
    s.remove_suffix(1);
  }
  return s;
}

std::string iso_now() {
  auto now = std::chrono::system_clock::now();
  auto ms = std::chrono::duration_cast<std::chrono::milliseconds>(now.time_since_epoch()).count() % 1000;
  return fmt::format("{:%Y-%m-%dT%H:%M:%S}.{:03}Z", fmt::gmtime(std::chrono::system_clock::to_time_t(now)), ms);
}

const Rational* lookup_rubric(const MockBackend::Fixture& f, const std::string& entry, const std::string& target) {
  for (const std::string& key : {entry, std::string("*")}) {
    if (auto e = f.rubrics.find(key); e != f.rubrics.end()) {
      if (auto r = e->second.find(target); r != e->second.end()) return &r->second;
    }
  }
  return nullptr;
}

const int* lookup_relevance(const MockBackend::Fixture& f, const std::string& entry, const std::string& keyword) {
  for (const std::string& key : {entry, std::string("*")}) {
    if (auto e = f.relevance.find(key); e != f.relevance.end()) {
      if (auto r = e->second.find(keyword); r != e->second.end()) return &r->second;
    }
  }
  return nullptr;
}

struct PermitGuard {
  explicit PermitGuard(ConcurrencyLimiter& l) : limiter(l) { limiter.acquire(); }
  ~PermitGuard() { limiter.release(); }
  PermitGuard(const PermitGuard&) = delete;
  PermitGuard& operator=(const PermitGuard&) = delete;
  ConcurrencyLimiter& limiter;
};

}  // namespace

std::vector<std::string> JudgerConfig::problems() const {
  std::vector<std::string> out;
  if (max_concurrency < 1) out.push_back(fmt::format("max_concurrency = {} must be >= 1", max_concurrency));
  if (retries < 0) out.push_back(fmt::format("retries = {} must be >= 0", retries));
  if (temperature < 0.0) out.push_back(fmt::format("temperature = {} must be >= 0", temperature));
  if (timeout.count() <= 0) out.push_back("timeout must be positive");
  if (backend == JudgerBackendKind::kLive && url.empty()) out.push_back("live judger needs an endpoint URL");
  return out;
}

std::string_view to_string(JudgerBackendKind kind) { return kind == JudgerBackendKind::kMock ? "mock" : "live"; }

JudgerBackendKind parse_backend_kind(std::string_view text) {
  if (text == "mock") return JudgerBackendKind::kMock;
  if (text == "live") return JudgerBackendKind::kLive;
  throw UsageError(fmt::format("unknown judger backend '{}' (expected mock or live)", text));
}

std::string_view to_string(TargetKind kind) {
  switch (kind) {
    case TargetKind::kQsr: return "qsr";
    case TargetKind::kGrr: return "grr";
    case TargetKind::kFak: return "fak";
    case TargetKind::kFdk: return "fdk";
  }
  return "unknown";
}

// Terminating fractions are shown as decimals, which judges echo back more reliably.
std::string score_text(const Rational& v) {
  std::int64_t den = v.den();
  int twos = 0, fives = 0;
  while (den % 2 == 0) den /= 2, ++twos;
  while (den % 5 == 0) den /= 5, ++fives;
  if (den != 1 || v.den() == 1) return v.to_string();
  const int digits = std::max(twos, fives);
  std::int64_t scale = 1;
  for (int i = 0; i < digits; ++i) scale *= 10;
  const std::int64_t scaled = v.num() * (scale / v.den());
  const std::int64_t mag = scaled < 0 ? -scaled : scaled;
  return fmt::format("{}{}.{:0{}}", scaled < 0 ? "-" : "", mag / scale, mag % scale, digits);
}

std::string format_allowed_scores(std::span<const Rational> allowed) {
  std::string out;
  for (std::size_t i = 0; i < allowed.size(); ++i) {
    if (i > 0) out += ", ";
    out += score_text(allowed[i]);
  }
  return out;
}

std::string format_rule(const Rubric& rubric) {
  return fmt::format("{} (Allowed score values: {})", rubric.text, format_allowed_scores(rubric.allowed_scores));
}

std::string render_rubric_prompt(std::string_view report_text, const Rubric& rubric) {
  std::string rule = format_rule(rubric);
  std::string out;
  out.reserve(kRubricPromptHead.size() + report_text.size() + kRuleLabel.size() + rule.size());
  out.append(kRubricPromptHead).append(report_text).append(kRuleLabel).append(rule);
  return out;
}

std::string render_relevance_prompt(std::string_view report_text, std::string_view keyword) {
  std::string out;
  out.reserve(kRelevancePromptHead.size() + report_text.size() + kKeywordLabel.size() + keyword.size());
  out.append(kRelevancePromptHead).append(report_text).append(kKeywordLabel).append(keyword);
  return out;
}

Verdict parse_verdict(std::string_view reply, std::span<const Rational> allowed) {
  std::string_view s = trim_left(reply);
  if (s.empty() || s.front() != '[') {
    throw MalformedVerdict(fmt::format("reply does not start with a bracketed score: '{}'", reply.substr(0, 80)));
  }
  auto close = s.find(']');
  if (close == std::string_view::npos) throw MalformedVerdict("unterminated score bracket");
  Rational score;
  try {
    score = Rational::parse(s.substr(1, close - 1));
  } catch (const std::exception&) {
    throw MalformedVerdict(fmt::format("non-numeric score '{}'", s.substr(1, close - 1)));
  }
  if (std::find(allowed.begin(), allowed.end(), score) == allowed.end()) {
    throw DisallowedScore(fmt::format("score {} not in allowed set {{{}}}", score.to_string(), format_allowed_scores(allowed)));
  }
  return Verdict{score, std::string(trim(s.substr(close + 1))), std::string(reply)};
}

std::span<const Rational> relevance_scale() { return kRelevanceScale; }

// ---------------------------------------------------------------------------

MockBackend::Fixture MockBackend::load_fixture(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw FileUnreadable(fmt::format("cannot read mock fixture {}", path.string()));
  nlohmann::json j;
  try {
    j = nlohmann::json::parse(in);
  } catch (const nlohmann::json::exception& e) {
    throw SchemaViolation(fmt::format("mock fixture {}: {}", path.string(), e.what()));
  }
  if (!j.is_object()) throw SchemaViolation("mock fixture must be a JSON object");

  Fixture f;
  if (auto it = j.find("default_rubric"); it != j.end()) {
    if (it->is_string() && *it == "max") {
      f.default_rubric = RubricDefault::kMax;
    } else if (it->is_string() && *it == "min") {
      f.default_rubric = RubricDefault::kMin;
    } else {
      f.default_rubric = RubricDefault::kValue;
      f.default_rubric_value = rational_from_json(*it);
    }
  }
  if (auto it = j.find("default_relevance"); it != j.end()) {
    if (!it->is_number_integer()) throw SchemaViolation("default_relevance must be an integer");
    f.default_relevance = it->get<int>();
  }
  try {
    if (auto it = j.find("rubrics"); it != j.end()) {
      for (const auto& [entry, scores] : it->items()) {
        for (const auto& [rubric, score] : scores.items()) f.rubrics[entry][rubric] = rational_from_json(score);
      }
    }
    if (auto it = j.find("relevance"); it != j.end()) {
      for (const auto& [entry, scores] : it->items()) {
        for (const auto& [keyword, rele] : scores.items()) f.relevance[entry][keyword] = rele.get<int>();
      }
    }
  } catch (const nlohmann::json::exception& e) {
    throw SchemaViolation(fmt::format("mock fixture {}: {}", path.string(), e.what()));
  }
  return f;
}

std::string MockBackend::complete(const JudgeRequest& request) {
  std::string score;
  if (request.kind == TargetKind::kQsr || request.kind == TargetKind::kGrr) {
    if (const Rational* r = lookup_rubric(fixture_, request.entry_id, request.target)) {
      score = r->to_string();
    } else if (fixture_.default_rubric == RubricDefault::kValue || request.allowed.empty()) {
      score = fixture_.default_rubric_value.to_string();
    } else if (fixture_.default_rubric == RubricDefault::kMax) {
      score = request.allowed.back().to_string();
    } else {
      score = request.allowed.front().to_string();
    }
  } else {
    const int* r = lookup_relevance(fixture_, request.entry_id, request.target);
    score = std::to_string(r != nullptr ? *r : fixture_.default_relevance);
  }
  return fmt::format("[{}] Mock verdict for {} '{}'.", score, to_string(request.kind), request.target);
}

// ---------------------------------------------------------------------------

TranscriptLog::TranscriptLog(const std::filesystem::path& path, std::string run_id)
    : out_(path, std::ios::app), run_id_(std::move(run_id)) {
  if (!out_) throw FileUnreadable(fmt::format("cannot open transcript log {}", path.string()));
}

void TranscriptLog::append(const JudgeRequest& request, std::string_view reply, const std::optional<Rational>& score,
                           std::string_view error, int attempt) {
  nlohmann::json rec = {
      {"timestamp", iso_now()},
      {"entry_id", request.entry_id},
      {"target", fmt::format("{}:{}", to_string(request.kind), request.target)},
      {"attempt", attempt},
      {"prompt", request.prompt},
      {"reply", reply},
      {"score", score ? rational_to_json(*score) : nlohmann::json(nullptr)},
  };
  if (!error.empty()) rec["error"] = error;
  if (!run_id_.empty()) rec["run_id"] = run_id_;
  std::string line = rec.dump(-1, ' ', false, nlohmann::json::error_handler_t::replace);
  std::lock_guard lock(mu_);
  out_ << line << '\n';
  out_.flush();
}

// ---------------------------------------------------------------------------

void ConcurrencyLimiter::acquire() {
  std::unique_lock lock(mu_);
  cv_.wait(lock, [this] { return available_ > 0; });
  --available_;
}

void ConcurrencyLimiter::release() {
  {
    std::lock_guard lock(mu_);
    ++available_;
  }
  cv_.notify_one();
}

Judger::Judger(JudgerConfig config, std::shared_ptr<JudgeBackend> backend, std::shared_ptr<TranscriptLog> transcripts)
    : config_(std::move(config)),
      backend_(std::move(backend)),
      transcripts_(std::move(transcripts)),
      limiter_(std::max(1, config_.max_concurrency)) {
  if (!backend_) throw std::invalid_argument("judger needs a backend");
}

Verdict Judger::judge(const JudgeRequest& request) {
  const int attempts = 1 + std::max(0, config_.retries);
  std::string last_error;
  bool last_was_transport = false;
  for (int attempt = 1; attempt <= attempts; ++attempt) {
    std::string reply;
    try {
      PermitGuard permit(limiter_);
      {
        std::lock_guard lock(stats_mu_);
        ++calls_;
      }
      reply = backend_->complete(request);
    } catch (const TransportError& e) {
      last_error = e.what();
      last_was_transport = true;
      if (transcripts_) transcripts_->append(request, "", std::nullopt, last_error, attempt);
      if (attempt < attempts && config_.retry_backoff.count() > 0) {
        std::this_thread::sleep_for(config_.retry_backoff * (1 << std::min(attempt - 1, 6)));
      }
      continue;
    }
    try {
      Verdict v = parse_verdict(reply, request.allowed);
      if (transcripts_) transcripts_->append(request, reply, v.score, "", attempt);
      return v;
    } catch (const Error& e) {
      last_error = e.what();
      last_was_transport = false;
      if (transcripts_) transcripts_->append(request, reply, std::nullopt, last_error, attempt);
    }
  }
  std::string what = fmt::format("{} {}:{} after {} attempt(s): {}", request.entry_id, to_string(request.kind),
                                 request.target, attempts, last_error);
  if (last_was_transport) throw JudgerUnavailable(what);
  throw VerdictUnparseable(what);
}

Verdict Judger::judge_rubric(std::string_view entry_id, std::string_view report_text, const Rubric& rubric,
                             TargetKind kind) {
  return judge(make_rubric_request(entry_id, report_text, rubric, kind));
}

Verdict Judger::judge_relevance(std::string_view entry_id, std::string_view report_text, std::string_view keyword,
                                TargetKind kind) {
  return judge(make_relevance_request(entry_id, report_text, keyword, kind));
}

std::vector<JudgeOutcome> Judger::judge_all(std::span<const JudgeRequest> requests) {
  std::vector<JudgeOutcome> outcomes(requests.size());
  auto run_one = [&](std::size_t i) {
    try {
      outcomes[i].verdict = judge(requests[i]);
    } catch (const JudgerUnavailable& e) {
      outcomes[i].error_kind = "JudgerUnavailable";
      outcomes[i].error = e.what();
      outcomes[i].transport_failure = true;
    } catch (const VerdictUnparseable& e) {
      outcomes[i].error_kind = "VerdictUnparseable";
      outcomes[i].error = e.what();
    } catch (const std::exception& e) {
      outcomes[i].error_kind = "BackendError";
      outcomes[i].error = e.what();
      outcomes[i].transport_failure = true;
    }
  };

  const std::size_t workers = std::min<std::size_t>(requests.size(), static_cast<std::size_t>(std::max(1, config_.max_concurrency)));
  if (workers <= 1) {
    for (std::size_t i = 0; i < requests.size(); ++i) run_one(i);
    return outcomes;
  }
  std::atomic<std::size_t> next{0};
  std::vector<std::jthread> pool;
  pool.reserve(workers);
  for (std::size_t w = 0; w < workers; ++w) {
    pool.emplace_back([&] {
      for (std::size_t i = next++; i < requests.size(); i = next++) run_one(i);
    });
  }
  pool.clear();
  return outcomes;
}

std::uint64_t Judger::backend_calls() const {
  std::lock_guard lock(stats_mu_);
  return calls_;
}

JudgeRequest make_rubric_request(std::string_view entry_id, std::string_view report_text, const Rubric& rubric,
                                 TargetKind kind) {
  return JudgeRequest{std::string(entry_id), kind, rubric.id, render_rubric_prompt(report_text, rubric),
                      rubric.allowed_scores};
}

JudgeRequest make_relevance_request(std::string_view entry_id, std::string_view report_text, std::string_view keyword,
                                    TargetKind kind) {
  return JudgeRequest{std::string(entry_id), kind, std::string(keyword), render_relevance_prompt(report_text, keyword),
                      std::vector<Rational>(kRelevanceScale.begin(), kRelevanceScale.end())};
}

std::shared_ptr<JudgeBackend> make_backend(const JudgerConfig& config,
                                           const std::optional<std::filesystem::path>& fixture) {
  if (config.backend == JudgerBackendKind::kLive) return std::make_shared<LiveBackend>(config);
  if (fixture) return std::make_shared<MockBackend>(MockBackend::load_fixture(*fixture));
  return std::make_shared<MockBackend>();
}

}  // namespace rbench
