#pragma once

#include <filesystem>
#include <optional>
#include <string>
#include <vector>

#include <nlohmann/json.hpp>

#include "rbench/aggregate.hpp"
#include "rbench/bench_model.hpp"
#include "rbench/response_model.hpp"
#include "rbench/scorer.hpp"

namespace rbench {

// Record <-> JSON. Parsers throw SchemaViolation on structural problems.

BenchEntry entry_from_json(const nlohmann::json& j);
nlohmann::json entry_to_json(const BenchEntry& entry);
Rubric rubric_from_json(const nlohmann::json& j);
nlohmann::json rubric_to_json(const Rubric& rubric);
GrrCatalog grr_catalog_from_json(const nlohmann::json& j);
nlohmann::json grr_catalog_to_json(const GrrCatalog& catalog);

/// A bundle without an "annotations" key falls back to URLs harvested from
/// the report text.
ResponseBundle response_from_json(const nlohmann::json& j);
nlohmann::json response_to_json(const ResponseBundle& bundle);

nlohmann::json score_to_json(const EntryScore& score, std::string_view run_id);
EntryScore score_from_json(const nlohmann::json& j);
nlohmann::json means_to_json(const ScoreMeans& means);
nlohmann::json aggregate_to_json(const ModelAggregate& aggregate);
ModelAggregate aggregate_from_json(const nlohmann::json& j);

/// Compact single-line serialization used for every .jsonl file.
std::string dump_line(const nlohmann::json& j);

// Files.

struct SkippedEntry {
  std::size_t line = 0;
  std::string id;
  ValidationReport violations;
};

struct LoadedBench {
  std::vector<BenchEntry> entries;  // valid entries only, file order
  GrrCatalog grrs;
  ValidationReport grr_violations;  // empty when the catalog is usable
  std::vector<SkippedEntry> skipped;
};

/// Reads the entry JSON-lines file and the GRR catalog. Invalid entries are
/// reported in `skipped` and left out. Throws FileUnreadable, SchemaViolation.
LoadedBench load_entries(const std::filesystem::path& entries_path, const std::filesystem::path& grr_path);

/// Reads a response JSON-lines file. A bundle with no model_name takes
/// model_name; one naming a different model is a SchemaViolation. Throws
/// DuplicateResponse for a repeated entry id.
std::vector<ResponseBundle> load_responses(const std::filesystem::path& path, const std::string& model_name);

/// Single-record lookups for debug commands. Throw UsageError when absent.
BenchEntry find_entry(const std::filesystem::path& entries_path, const std::string& id);
ResponseBundle find_response(const std::filesystem::path& responses_path, const std::string& entry_id);

struct ScoreFile {
  std::vector<EntryScore> scores;
  std::vector<std::string> run_ids;  // distinct, first-seen order
  std::size_t truncated_lines = 0;   // unparseable trailing lines dropped
};

/// Reads a scores file. A malformed final line (an interrupted append) is
/// dropped and counted; malformed earlier lines are a SchemaViolation.
ScoreFile load_scores(const std::filesystem::path& path);

/// Lowercase hex SHA-256 of a file's bytes. Throws FileUnreadable.
std::string sha256_file(const std::filesystem::path& path);
std::string sha256_hex(std::string_view data);

/// Writes via a temporary file and rename.
void write_file_atomic(const std::filesystem::path& path, std::string_view content);

}  // namespace rbench
