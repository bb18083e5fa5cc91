#pragma once

#include <filesystem>
#include <memory>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include "rbench/config.hpp"
#include "rbench/io.hpp"
#include "rbench/judger.hpp"
#include "rbench/scorer.hpp"

namespace rbench {

inline constexpr const char* kManifestFile = "manifest.json";
inline constexpr const char* kScoresFile = "scores.jsonl";
inline constexpr const char* kTranscriptsFile = "transcripts.jsonl";

struct RunOptions {
  std::filesystem::path out_dir;
  std::string model_name;
  int workers = 4;                   // entries scored concurrently
  bool resume = false;
  bool transcripts = true;
  std::optional<int> domain_filter;
  std::optional<std::size_t> stop_after;  // stop after this many newly scored entries
  // Content digests of the input files. Computed from the loaded records
  // when left empty.
  std::string entries_digest;
  std::string responses_digest;
};

struct FailedEntry {
  std::string entry_id;
  std::string error_kind;
  std::string detail;
};

struct RunSummary {
  std::string run_id;
  std::vector<EntryScore> scores;          // entry order
  std::vector<std::string> missing;        // entries without a response
  std::vector<std::string> unmatched;      // responses without an entry
  std::vector<FailedEntry> failed;
  std::size_t reused = 0;                  // taken over from a previous session
  std::size_t newly_scored = 0;
  bool interrupted = false;
};

/// Deterministic identifier of a run's inputs and settings.
std::string compute_run_id(std::string_view entries_digest, std::string_view responses_digest,
                           const EvalConfig& config, const std::string& model_name, std::optional<int> domain_filter);

/// Scores every (entry, response) pair and writes manifest.json and
/// scores.jsonl (plus transcripts.jsonl unless disabled) into out_dir.
///
/// Score records are appended as they finish and rewritten in entry order at
/// the end. With resume set, entries already scored under the same run id are
/// kept and not judged again; a manifest from a different run id is an error.
/// Per-entry scorer failures are recorded and the run continues.
/// Throws UsageError for an unusable catalog or configuration.
RunSummary run_evaluate(const LoadedBench& bench, std::span<const ResponseBundle> responses, const EvalConfig& config,
                        std::shared_ptr<JudgeBackend> backend, const RunOptions& options);

}  // namespace rbench
