#pragma once

#include <chrono>
#include <condition_variable>
#include <cstdint>
#include <filesystem>
#include <fstream>
#include <map>
#include <memory>
#include <mutex>
#include <optional>
#include <span>
#include <string>
#include <string_view>
#include <vector>

#include "rbench/bench_model.hpp"
#include "rbench/rational.hpp"

namespace rbench {

struct Verdict {
  Rational score;
  std::string reason;
  std::string raw;
};

enum class JudgerBackendKind { kMock, kLive };

struct JudgerConfig {
  JudgerBackendKind backend = JudgerBackendKind::kMock;
  std::string url;       // chat-completion endpoint, live only
  std::string model = "gpt-4o-2024-11-20";
  std::string api_key;   // never serialized
  double temperature = 0.0;
  int max_concurrency = 4;
  int retries = 2;       // extra attempts after the first
  std::chrono::milliseconds timeout{120000};
  std::chrono::milliseconds retry_backoff{500};

  std::vector<std::string> problems() const;
};

std::string_view to_string(JudgerBackendKind kind);
JudgerBackendKind parse_backend_kind(std::string_view text);

/// What a judger call is scoring.
enum class TargetKind { kQsr, kGrr, kFak, kFdk };

std::string_view to_string(TargetKind kind);

// ---------------------------------------------------------------------------
// Prompts and parsing

/// Comma-separated ladder, e.g. "0, 1, 2".
std::string format_allowed_scores(std::span<const Rational> allowed);

/// Rule slot content: criterion text followed by its allowed score values.
std::string format_rule(const Rubric& rubric);

std::string render_rubric_prompt(std::string_view report_text, const Rubric& rubric);
std::string render_relevance_prompt(std::string_view report_text, std::string_view keyword);

/// Reads the leading "[score]" and the reason that follows it.
/// Throws MalformedVerdict or DisallowedScore.
Verdict parse_verdict(std::string_view reply, std::span<const Rational> allowed);

/// {1, 2, 3, 4, 5}.
std::span<const Rational> relevance_scale();

// ---------------------------------------------------------------------------
// Backends

struct JudgeRequest {
  std::string entry_id;
  TargetKind kind = TargetKind::kQsr;
  std::string target;  // rubric id or keyword
  std::string prompt;
  std::vector<Rational> allowed;
};

/// Sends a prompt and returns the completion text. Throws TransportError on
/// any failure that is worth retrying.
class JudgeBackend {
 public:
  virtual ~JudgeBackend() = default;
  virtual std::string complete(const JudgeRequest& request) = 0;
};

/// Scores served from a fixture. A pure function of (entry id, target).
///
/// Lookups try the exact entry id first, then the "*" wildcard entry. Unknown
/// rubrics fall back to default_rubric (the rubric's max, min, or a fixed
/// value); unknown keywords fall back to default_relevance.
class MockBackend : public JudgeBackend {
 public:
  enum class RubricDefault { kMax, kMin, kValue };

  struct Fixture {
    RubricDefault default_rubric = RubricDefault::kMax;
    Rational default_rubric_value;
    int default_relevance = 5;
    std::map<std::string, std::map<std::string, Rational>> rubrics;  // entry -> rubric id -> score
    std::map<std::string, std::map<std::string, int>> relevance;     // entry -> keyword -> rele
  };

  MockBackend() = default;
  explicit MockBackend(Fixture fixture) : fixture_(std::move(fixture)) {}

  static Fixture load_fixture(const std::filesystem::path& path);

  std::string complete(const JudgeRequest& request) override;

  const Fixture& fixture() const { return fixture_; }

 private:
  Fixture fixture_;
};

/// Chat-completion style HTTP endpoint: POSTs {model, temperature, messages}
/// and reads choices[0].message.content.
class LiveBackend : public JudgeBackend {
 public:
  explicit LiveBackend(JudgerConfig config);
  std::string complete(const JudgeRequest& request) override;

 private:
  JudgerConfig config_;
  std::string origin_;  // scheme://host[:port]
  std::string path_;
};

std::shared_ptr<JudgeBackend> make_backend(const JudgerConfig& config,
                                           const std::optional<std::filesystem::path>& fixture);

// ---------------------------------------------------------------------------
// Transcripts

/// Append-only JSON-lines log of every judger attempt.
class TranscriptLog {
 public:
  /// Every record carries run_id when it is non-empty.
  explicit TranscriptLog(const std::filesystem::path& path, std::string run_id = {});

  void append(const JudgeRequest& request, std::string_view reply, const std::optional<Rational>& score,
              std::string_view error, int attempt);

 private:
  std::mutex mu_;
  std::ofstream out_;
  std::string run_id_;
};

// ---------------------------------------------------------------------------
// Judger

/// Counting gate for in-flight backend calls.
class ConcurrencyLimiter {
 public:
  explicit ConcurrencyLimiter(int permits) : available_(permits) {}

  void acquire();
  void release();

 private:
  std::mutex mu_;
  std::condition_variable cv_;
  int available_;
};

struct JudgeOutcome {
  std::optional<Verdict> verdict;
  std::string error_kind;  // "JudgerUnavailable" or "VerdictUnparseable" when verdict is empty
  std::string error;
  bool transport_failure = false;
};

class Judger {
 public:
  Judger(JudgerConfig config, std::shared_ptr<JudgeBackend> backend, std::shared_ptr<TranscriptLog> transcripts = nullptr);

  const JudgerConfig& config() const { return config_; }

  /// One request with retries. Retries resend the identical prompt.
  /// Throws JudgerUnavailable or VerdictUnparseable once the budget is spent.
  Verdict judge(const JudgeRequest& request);

  Verdict judge_rubric(std::string_view entry_id, std::string_view report_text, const Rubric& rubric,
                       TargetKind kind = TargetKind::kQsr);
  Verdict judge_relevance(std::string_view entry_id, std::string_view report_text, std::string_view keyword,
                          TargetKind kind = TargetKind::kFak);

  /// Runs every request, at most max_concurrency backend calls in flight
  /// across all callers. outcomes[i] always belongs to requests[i].
  std::vector<JudgeOutcome> judge_all(std::span<const JudgeRequest> requests);

  std::uint64_t backend_calls() const;

 private:
  JudgerConfig config_;
  std::shared_ptr<JudgeBackend> backend_;
  std::shared_ptr<TranscriptLog> transcripts_;
  ConcurrencyLimiter limiter_;
  mutable std::mutex stats_mu_;
  std::uint64_t calls_ = 0;
};

JudgeRequest make_rubric_request(std::string_view entry_id, std::string_view report_text, const Rubric& rubric,
                                 TargetKind kind);
JudgeRequest make_relevance_request(std::string_view entry_id, std::string_view report_text, std::string_view keyword,
                                    TargetKind kind);

}  // namespace rbench
