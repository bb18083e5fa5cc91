#pragma once

#include <array>
#include <map>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include "rbench/bench_model.hpp"
#include "rbench/scorer.hpp"

namespace rbench {

/// Arithmetic means of per-entry values. Every mean is taken over entries
/// (mean of products, never product of means); optional metrics are averaged
/// over the entries that have them.
struct ScoreMeans {
  std::size_t n_entries = 0;
  double mean_quality = 0.0;
  double mean_one_minus_drift = 0.0;
  double mean_boost = 0.0;
  double mean_integrated = 0.0;
  double mean_usage_tokens = 0.0;  // token_total
  std::optional<double> mean_contribution_per_token;

  /// mean_quality * mean_one_minus_drift * mean_boost * 100. Reported for
  /// comparison only; it generally differs from mean_integrated.
  double product_of_means() const { return mean_quality * mean_one_minus_drift * mean_boost * 100.0; }
};

ScoreMeans compute_means(std::span<const EntryScore> scores);

struct ModelAggregate {
  std::string model_name;
  ScoreMeans means;
  std::map<int, ScoreMeans> per_domain;
  std::optional<double> mean_reason_times;
  std::optional<double> mean_search_times;
  std::optional<double> mean_retrieval_index;
  std::size_t n_incomplete = 0;  // entries with at least one failed judgment
};

/// Throws EmptyInput or MixedModels.
ModelAggregate aggregate_model(std::span<const EntryScore> scores);

/// One aggregate per model name, in leaderboard order.
std::vector<ModelAggregate> aggregate_by_model(std::span<const EntryScore> scores);

/// Leaderboard order: mean_integrated desc, mean_quality desc, model_name asc.
bool leaderboard_before(const ModelAggregate& a, const ModelAggregate& b);

enum class LeaderboardColumn { kQuality, kOneMinusDrift, kBoost, kIntegrated, kUsage, kContributionPerToken };
inline constexpr std::size_t kLeaderboardColumns = 6;

std::string_view column_title(LeaderboardColumn column);

enum class Rank { kNone, kBest, kSecond };

struct LeaderboardRow {
  std::string model_name;
  std::size_t n_entries = 0;
  std::array<std::optional<double>, kLeaderboardColumns> values;
  std::array<Rank, kLeaderboardColumns> ranks{};
};

struct Leaderboard {
  std::vector<LeaderboardRow> rows;

  /// Aligned table; "*" marks a column's highest value and "+" the second.
  std::string to_text() const;
  std::string to_tsv() const;
};

Leaderboard render_leaderboard(std::span<const ModelAggregate> aggregates);

/// Per-domain, per-model means, plus a MIX row over all entries.
struct DomainMatrix {
  static constexpr int kMix = -1;

  std::vector<int> domains;          // ascending, then kMix
  std::vector<std::string> models;   // leaderboard order of the MIX row
  std::map<std::pair<int, std::string>, ScoreMeans> cells;  // absent = no entries

  const ScoreMeans* cell(int domain, const std::string& model) const;

  /// Rows are domain x {QUA, SDR, TBO, ITS}; "-" marks an absent cell.
  std::string to_text() const;
  std::string to_tsv() const;
};

/// Domains are resolved through the entries. Throws UnresolvedEntry.
DomainMatrix aggregate_domain_matrix(std::span<const EntryScore> all_scores, std::span<const BenchEntry> entries);

}  // namespace rbench
