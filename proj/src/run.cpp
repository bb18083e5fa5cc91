#include "rbench/run.hpp"

#include <atomic>
#include <chrono>
#include <fstream>
#include <mutex>
#include <set>
#include <thread>
#include <unordered_map>

#include <fmt/chrono.h>
#include <fmt/format.h>
#include <spdlog/spdlog.h>

#include "rbench/errors.hpp"

namespace rbench {
namespace {

using nlohmann::json;

std::string utc_now() {
  auto now = std::chrono::floor<std::chrono::seconds>(std::chrono::system_clock::now());
  return fmt::format("{:%Y-%m-%dT%H:%M:%SZ}", fmt::gmtime(std::chrono::system_clock::to_time_t(now)));
}

std::string digest_entries(const LoadedBench& bench) {
  std::string buf;
  for (const auto& e : bench.entries) buf += dump_line(entry_to_json(e)) + '\n';
  buf += dump_line(grr_catalog_to_json(bench.grrs));
  return sha256_hex(buf);
}

std::string digest_responses(std::span<const ResponseBundle> responses) {
  std::string buf;
  for (const auto& r : responses) buf += dump_line(response_to_json(r)) + '\n';
  return sha256_hex(buf);
}

struct Manifest {
  std::string run_id;
  std::string status;
  std::string started;
  std::string finished;
  std::string entries_digest;
  std::string responses_digest;
  std::string model_name;
  std::optional<int> domain_filter;
  json config;
  std::size_t planned = 0;
  std::size_t scored = 0;
  std::vector<std::string> missing;
  std::vector<std::string> unmatched;
  std::vector<FailedEntry> failed;
  std::vector<std::pair<std::string, std::string>> skipped_invalid;  // id, first violation code
};

json manifest_to_json(const Manifest& m) {
  json failed = json::array();
  for (const auto& f : m.failed) failed.push_back({{"entry_id", f.entry_id}, {"error_kind", f.error_kind}, {"detail", f.detail}});
  json skipped = json::array();
  for (const auto& [id, code] : m.skipped_invalid) skipped.push_back({{"entry_id", id}, {"violation", code}});
  return {
      {"run_id", m.run_id},
      {"status", m.status},
      {"started", m.started},
      {"finished", m.finished.empty() ? json(nullptr) : json(m.finished)},
      {"tool_version", kToolVersion},
      {"entries_digest", m.entries_digest},
      {"responses_digest", m.responses_digest},
      {"model_name", m.model_name},
      {"domain_filter", m.domain_filter ? json(*m.domain_filter) : json(nullptr)},
      {"config", m.config},
      {"planned", m.planned},
      {"scored", m.scored},
      {"missing", m.missing},
      {"unmatched_responses", m.unmatched},
      {"failed", failed},
      {"skipped_invalid", skipped},
  };
}

void write_manifest(const std::filesystem::path& dir, const Manifest& m) {
  write_file_atomic(dir / kManifestFile, manifest_to_json(m).dump(2) + '\n');
}

std::optional<std::string> previous_run_id(const std::filesystem::path& dir) {
  std::ifstream in(dir / kManifestFile);
  if (!in) return std::nullopt;
  try {
    return json::parse(in).at("run_id").get<std::string>();
  } catch (const json::exception& e) {
    throw SchemaViolation(fmt::format("unreadable manifest in {}: {}", dir.string(), e.what()));
  }
}

// Serializes score-record appends.
class ScoreWriter {
 public:
  ScoreWriter(const std::filesystem::path& path, bool append)
      : out_(path, append ? std::ios::app | std::ios::binary : std::ios::trunc | std::ios::binary) {
    if (!out_) throw FileUnreadable(fmt::format("cannot write {}", path.string()));
  }

  void append(const std::string& line) {
    std::lock_guard lock(mu_);
    out_ << line << '\n';
    out_.flush();
  }

 private:
  std::mutex mu_;
  std::ofstream out_;
};

}  // namespace

std::string compute_run_id(std::string_view entries_digest, std::string_view responses_digest, const EvalConfig& config,
                           const std::string& model_name, std::optional<int> domain_filter) {
  json key = {
      {"entries", entries_digest},
      {"responses", responses_digest},
      {"config", config_to_json(config)},
      {"model", model_name},
      {"domain", domain_filter ? json(*domain_filter) : json(nullptr)},
      {"version", kToolVersion},
  };
  return sha256_hex(key.dump()).substr(0, 16);
}

RunSummary run_evaluate(const LoadedBench& bench, std::span<const ResponseBundle> responses, const EvalConfig& config,
                        std::shared_ptr<JudgeBackend> backend, const RunOptions& options) {
  if (!bench.grr_violations.empty()) {
    throw UsageError(fmt::format("GRR catalog is invalid ({}: {})", to_string(bench.grr_violations.front().code),
                                 bench.grr_violations.front().message));
  }
  if (auto problems = config_problems(config); !problems.empty()) {
    throw UsageError(fmt::format("invalid configuration: {}", problems.front()));
  }
  if (options.out_dir.empty()) throw UsageError("no output directory given");
  std::filesystem::create_directories(options.out_dir);

  Manifest manifest;
  manifest.entries_digest = options.entries_digest.empty() ? digest_entries(bench) : options.entries_digest;
  manifest.responses_digest = options.responses_digest.empty() ? digest_responses(responses) : options.responses_digest;
  manifest.model_name = options.model_name;
  manifest.domain_filter = options.domain_filter;
  manifest.config = config_to_json(config);
  manifest.run_id = compute_run_id(manifest.entries_digest, manifest.responses_digest, config, options.model_name,
                                   options.domain_filter);
  manifest.started = utc_now();
  manifest.status = "running";
  for (const auto& s : bench.skipped) {
    manifest.skipped_invalid.emplace_back(s.id, s.violations.empty() ? "" : std::string(to_string(s.violations.front().code)));
  }

  RunSummary summary;
  summary.run_id = manifest.run_id;

  // Pair entries with responses.
  std::unordered_map<std::string, const ResponseBundle*> by_entry;
  for (const auto& r : responses) by_entry.emplace(r.entry_id, &r);
  std::set<std::string> entry_ids;
  std::vector<std::pair<const BenchEntry*, const ResponseBundle*>> plan;
  for (const auto& e : bench.entries) {
    entry_ids.insert(e.id);
    if (options.domain_filter && e.domain_code != *options.domain_filter) continue;
    auto it = by_entry.find(e.id);
    if (it == by_entry.end()) {
      summary.missing.push_back(e.id);
      continue;
    }
    plan.emplace_back(&e, it->second);
  }
  for (const auto& r : responses) {
    if (entry_ids.count(r.entry_id) == 0) summary.unmatched.push_back(r.entry_id);
  }
  for (const auto& id : summary.missing) spdlog::warn("entry '{}' has no response", id);
  for (const auto& id : summary.unmatched) spdlog::warn("response for unknown entry '{}' ignored", id);

  // Previous work.
  const auto scores_path = options.out_dir / kScoresFile;
  std::map<std::string, EntryScore> done;
  if (options.resume) {
    auto prev = previous_run_id(options.out_dir);
    if (prev && *prev != manifest.run_id) {
      throw UsageError(fmt::format("cannot resume: {} holds run {} but these inputs give run {}", options.out_dir.string(),
                                   *prev, manifest.run_id));
    }
    if (std::filesystem::exists(scores_path)) {
      ScoreFile previous = load_scores(scores_path);
      for (auto& s : previous.scores) done.insert_or_assign(s.entry_id, std::move(s));
    }
  }
  std::vector<std::size_t> todo;
  for (std::size_t i = 0; i < plan.size(); ++i) {
    if (done.count(plan[i].first->id) == 0) todo.push_back(i);
  }
  summary.reused = plan.size() - todo.size();
  manifest.planned = plan.size();
  write_manifest(options.out_dir, manifest);

  // A resumed file may end in a torn line; restart it from the kept records.
  {
    std::string kept;
    for (const auto& [entry, bundle] : plan) {
      if (auto it = done.find(entry->id); it != done.end()) kept += dump_line(score_to_json(it->second, manifest.run_id)) + '\n';
    }
    write_file_atomic(scores_path, kept);
  }

  const auto transcript_path = options.out_dir / kTranscriptsFile;
  std::shared_ptr<TranscriptLog> transcripts;
  if (options.transcripts) {
    if (!options.resume) std::filesystem::remove(transcript_path);
    transcripts = std::make_shared<TranscriptLog>(transcript_path, manifest.run_id);
  }
  Judger judger(config.judger, std::move(backend), transcripts);
  ScoreWriter writer(scores_path, true);

  std::vector<std::optional<EntryScore>> fresh(plan.size());
  std::vector<std::optional<FailedEntry>> failures(plan.size());
  std::atomic<std::size_t> next{0};
  std::atomic<std::size_t> claimed{0};
  std::atomic<bool> stopped{false};

  auto work = [&] {
    for (;;) {
      if (options.stop_after) {
        std::size_t c = claimed.fetch_add(1);
        if (c >= *options.stop_after) {
          stopped = true;
          return;
        }
      }
      std::size_t k = next.fetch_add(1);
      if (k >= todo.size()) return;
      const auto& [entry, bundle] = plan[todo[k]];
      try {
        EntryScore s = score_entry(*entry, bench.grrs, *bundle, config.weights, judger, config.trust_formula);
        writer.append(dump_line(score_to_json(s, manifest.run_id)));
        fresh[todo[k]] = std::move(s);
      } catch (const JudgerUnavailable& e) {
        failures[todo[k]] = FailedEntry{entry->id, "JudgerUnavailable", e.what()};
      } catch (const Error& e) {
        failures[todo[k]] = FailedEntry{entry->id, "ScoringError", e.what()};
      } catch (const std::exception& e) {
        failures[todo[k]] = FailedEntry{entry->id, "InternalError", e.what()};
      }
    }
  };

  {
    const std::size_t n_workers = std::clamp<std::size_t>(static_cast<std::size_t>(std::max(1, options.workers)), 1,
                                                           std::max<std::size_t>(todo.size(), 1));
    std::vector<std::jthread> pool;
    for (std::size_t i = 0; i < n_workers; ++i) pool.emplace_back(work);
  }
  summary.interrupted = stopped && next.load() < todo.size();

  std::string canonical;
  for (std::size_t i = 0; i < plan.size(); ++i) {
    const std::string& id = plan[i].first->id;
    if (auto it = done.find(id); it != done.end()) {
      summary.scores.push_back(std::move(it->second));
    } else if (fresh[i]) {
      summary.scores.push_back(std::move(*fresh[i]));
      ++summary.newly_scored;
    } else if (failures[i]) {
      spdlog::error("entry '{}' not scored: {}", id, failures[i]->detail);
      summary.failed.push_back(std::move(*failures[i]));
      continue;
    } else {
      continue;
    }
    canonical += dump_line(score_to_json(summary.scores.back(), manifest.run_id)) + '\n';
  }
  write_file_atomic(scores_path, canonical);

  manifest.status = summary.interrupted ? "interrupted" : "complete";
  manifest.finished = utc_now();
  manifest.scored = summary.scores.size();
  manifest.missing = summary.missing;
  manifest.unmatched = summary.unmatched;
  manifest.failed = summary.failed;
  write_manifest(options.out_dir, manifest);
  return summary;
}

}  // namespace rbench
