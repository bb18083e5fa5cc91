#pragma once

#include <cstdint>
#include <optional>
#include <string>
#include <vector>

#include "rbench/bench_model.hpp"
#include "rbench/judger.hpp"
#include "rbench/rational.hpp"
#include "rbench/response_model.hpp"
#include "rbench/trust_metrics.hpp"
#include "rbench/weights.hpp"

namespace rbench {

struct RubricScore {
  std::string id;
  Rational score;       // 0 when judging failed
  bool judged = true;
};

struct KeywordStat {
  std::string keyword;
  std::int64_t frequency = 0;
  int relevance = 1;    // 1 when judging failed
  bool judged = true;
};

/// A rubric or keyword whose judgment could not be obtained.
struct IncompleteFlag {
  TargetKind kind;
  std::string target;
  std::string error_kind;
  std::string detail;
};

/// Every per-entry metric.
///
/// integrated == quality * (1 - semantic_drift) * trust.boost * 100.
/// contribution_per_token is absent when no output tokens were spent and
/// retrieval_index is absent when the bundle carries no trace.
struct EntryScore {
  std::string entry_id;
  std::string model_name;
  int domain_code = 0;

  Rational qsr_sum;
  Rational grr_sum;
  double quality = 0.0;

  double fak_drift = 0.0;
  double fdk_drift = 0.0;
  double semantic_drift = 0.0;

  TrustResult trust;
  std::size_t num_links = 0;      // canonical, deduplicated annotations
  std::size_t dropped_links = 0;  // annotations that failed to parse

  double integrated = 0.0;
  std::optional<double> contribution_per_token;
  std::optional<double> retrieval_index;

  std::int64_t token_input = 0;
  std::int64_t token_total = 0;
  std::optional<Trace> trace;

  std::vector<RubricScore> qsr_scores;
  std::vector<RubricScore> grr_scores;
  std::vector<KeywordStat> fak_stats;
  std::vector<KeywordStat> fdk_stats;
  std::vector<IncompleteFlag> incomplete;

  bool complete() const { return incomplete.empty(); }
};

/// quality * (1 - semantic_drift) * boost * 100. Throws OutOfRange when an
/// input leaves [0, 1], [0, 1] or [1, max_boost] respectively.
double integrated_score(double quality, double semantic_drift, double boost, double max_boost = 1.2);

/// integrated / (token_total - token_input), absent when the denominator is 0.
/// Throws std::invalid_argument unless token_total >= token_input >= 0.
std::optional<double> contribution_per_token(double integrated, std::int64_t token_total, std::int64_t token_input);

/// min(num_annotated / (num_retrieved + 1), 1). Logs a warning when clamping.
double retrieval_index(std::int64_t num_annotated, std::int64_t num_retrieved);

/// Scores one response against one entry.
///
/// QSRs and GRRs are judged over the annotation-merged text; keyword relevance
/// and frequency use the annotation-free text; trust uses the canonical links.
/// Failed judgments are flagged and count as 0 points (rubrics) or relevance 1
/// (keywords). Throws EntryMismatch on an id mismatch and JudgerUnavailable
/// when every judger call failed.
EntryScore score_entry(const BenchEntry& entry, const GrrCatalog& grrs, const ResponseBundle& bundle,
                       const EvalWeights& weights, Judger& judger,
                       TrustFormula formula = TrustFormula::kAlgorithm);

}  // namespace rbench
