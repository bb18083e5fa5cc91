#include "rbench/scorer.hpp"

#include <algorithm>

#include <fmt/format.h>
#include <spdlog/spdlog.h>

#include "rbench/errors.hpp"
#include "rbench/semantic_metrics.hpp"

namespace rbench {
namespace {

constexpr double kRangeSlack = 1e-12;

bool within(double v, double lo, double hi) { return v >= lo - kRangeSlack && v <= hi + kRangeSlack; }

void flag(EntryScore& s, const JudgeRequest& req, const JudgeOutcome& out) {
  s.incomplete.push_back({req.kind, req.target, out.error_kind, out.error});
}

}  // namespace

double integrated_score(double quality, double semantic_drift, double boost, double max_boost) {
  if (!within(quality, 0.0, 1.0)) throw OutOfRange(fmt::format("quality {} outside [0, 1]", quality));
  if (!within(semantic_drift, 0.0, 1.0)) throw OutOfRange(fmt::format("semantic drift {} outside [0, 1]", semantic_drift));
  if (!within(boost, 1.0, max_boost)) throw OutOfRange(fmt::format("boost {} outside [1, {}]", boost, max_boost));
  return quality * (1.0 - semantic_drift) * boost * 100.0;
}

std::optional<double> contribution_per_token(double integrated, std::int64_t token_total, std::int64_t token_input) {
  if (token_input < 0 || token_total < token_input) {
    throw std::invalid_argument(fmt::format("token counts total={} input={} are inconsistent", token_total, token_input));
  }
  if (token_total == token_input) return std::nullopt;
  return integrated / static_cast<double>(token_total - token_input);
}

double retrieval_index(std::int64_t num_annotated, std::int64_t num_retrieved) {
  if (num_annotated < 0 || num_retrieved < 0) throw std::invalid_argument("retrieval counts must be non-negative");
  double ratio = static_cast<double>(num_annotated) / static_cast<double>(num_retrieved + 1);
  if (ratio > 1.0) {
    spdlog::warn("retrieval index {}/({}+1) exceeds 1; clamped", num_annotated, num_retrieved);
    return 1.0;
  }
  return ratio;
}

EntryScore score_entry(const BenchEntry& entry, const GrrCatalog& grrs, const ResponseBundle& bundle,
                       const EvalWeights& weights, Judger& judger, TrustFormula formula) {
  if (bundle.entry_id != entry.id) {
    throw EntryMismatch(fmt::format("response for '{}' scored against entry '{}'", bundle.entry_id, entry.id));
  }

  EntryScore s;
  s.entry_id = entry.id;
  s.model_name = bundle.model_name;
  s.domain_code = entry.domain_code;
  s.token_input = bundle.token_input;
  s.token_total = bundle.token_total;
  s.trace = bundle.trace;

  const std::string quality_text = text_for_quality(bundle);
  const std::string drift_text = text_for_drift(bundle);

  std::vector<JudgeRequest> requests;
  requests.reserve(entry.qsrs.size() + grrs.rubrics.size() + entry.faks.size() + entry.fdks.size());
  for (const auto& r : entry.qsrs) requests.push_back(make_rubric_request(entry.id, quality_text, r, TargetKind::kQsr));
  for (const auto& r : grrs.rubrics) requests.push_back(make_rubric_request(entry.id, quality_text, r, TargetKind::kGrr));
  for (const auto& k : entry.faks) requests.push_back(make_relevance_request(entry.id, drift_text, k, TargetKind::kFak));
  for (const auto& k : entry.fdks) requests.push_back(make_relevance_request(entry.id, drift_text, k, TargetKind::kFdk));

  const std::vector<JudgeOutcome> outcomes = judger.judge_all(requests);
  if (!outcomes.empty() && std::all_of(outcomes.begin(), outcomes.end(), [](const JudgeOutcome& o) { return !o.verdict; })) {
    throw JudgerUnavailable(fmt::format("every judger call failed for {}/{}: {}", bundle.model_name, entry.id,
                                        outcomes.front().error));
  }

  std::size_t i = 0;
  auto collect_rubrics = [&](std::size_t n, std::vector<RubricScore>& out, Rational& sum) {
    for (std::size_t k = 0; k < n; ++k, ++i) {
      const auto& o = outcomes[i];
      if (o.verdict) {
        out.push_back({requests[i].target, o.verdict->score, true});
        sum += o.verdict->score;
      } else {
        out.push_back({requests[i].target, Rational{}, false});
        flag(s, requests[i], o);
      }
    }
  };
  collect_rubrics(entry.qsrs.size(), s.qsr_scores, s.qsr_sum);
  collect_rubrics(grrs.rubrics.size(), s.grr_scores, s.grr_sum);
  s.quality = compute_quality(s.qsr_sum, s.grr_sum, weights);

  const FoldedText folded(drift_text);
  auto collect_keywords = [&](const std::vector<std::string>& keywords, std::vector<KeywordStat>& out) {
    std::vector<std::int64_t> freqs;
    std::vector<int> reles;
    for (const auto& keyword : keywords) {
      const auto& o = outcomes[i];
      KeywordStat stat{keyword, folded.count(keyword), 1, o.verdict.has_value()};
      if (o.verdict) {
        stat.relevance = static_cast<int>(o.verdict->score.num());
      } else {
        flag(s, requests[i], o);
      }
      freqs.push_back(stat.frequency);
      reles.push_back(stat.relevance);
      out.push_back(std::move(stat));
      ++i;
    }
    return std::pair{freqs, reles};
  };
  auto [fak_freqs, fak_reles] = collect_keywords(entry.faks, s.fak_stats);
  auto [fdk_freqs, fdk_reles] = collect_keywords(entry.fdks, s.fdk_stats);
  s.fak_drift = fak_drift(fak_freqs, fak_reles, weights);
  s.fdk_drift = fdk_drift(fdk_freqs, fdk_reles, weights);
  s.semantic_drift = semantic_drift(s.fak_drift, s.fdk_drift, weights);

  TrustLinks links = links_for_trust(bundle);
  s.num_links = links.links.size();
  s.dropped_links = links.dropped;
  s.trust = compute_trust(entry.tsls, links.links, weights, formula);

  s.integrated = integrated_score(s.quality, s.semantic_drift, s.trust.boost, 1.0 + weights.eta);
  s.contribution_per_token = contribution_per_token(s.integrated, s.token_total, s.token_input);
  if (s.trace) {
    s.retrieval_index = retrieval_index(static_cast<std::int64_t>(s.num_links), s.trace->num_retrieved);
  }

  if (!s.incomplete.empty()) {
    spdlog::warn("{}/{}: {} judgment(s) failed; scored as zero/minimum", s.model_name, s.entry_id, s.incomplete.size());
  }
  return s;
}

}  // namespace rbench
