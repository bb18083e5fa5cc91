#pragma once

#include <cstdint>
#include <span>
#include <string>
#include <string_view>

#include "rbench/rational.hpp"
#include "rbench/weights.hpp"

namespace rbench {

inline constexpr int kMinRelevance = 1;
inline constexpr int kMaxRelevance = 5;

/// sum / max_total. Throws OutOfRange unless 0 <= sum <= max_total.
double ratio_normalize(const Rational& sum, const Rational& max_total);

/// alpha * qsr_sum/30 + beta * grr_sum/73.
double compute_quality(const Rational& qsr_sum, const Rational& grr_sum, const EvalWeights& weights);

/// Case-folded view of a text for repeated keyword counting.
///
/// Matching is Unicode case-insensitive, treats any whitespace run as a single
/// space, and requires word boundaries: an occurrence may not be flanked by a
/// letter or digit. Scripts written without spaces (CJK ideographs, kana,
/// Thai) are exempt from the boundary rule. Occurrences are counted greedily
/// left to right without overlap.
class FoldedText {
 public:
  explicit FoldedText(std::string_view text);

  /// Throws std::invalid_argument for a blank keyword.
  std::int64_t count(std::string_view keyword) const;

 private:
  std::u32string folded_;
};

std::int64_t keyword_frequency(std::string_view text, std::string_view keyword);

/// 1 - mean_k[min(freq_k / eps_plus, 1) * rele_k / 5].
double fak_drift(std::span<const std::int64_t> freqs, std::span<const int> reles, const EvalWeights& weights);

/// mean_l[min(freq_l / eps_minus, 1) * rele_l / 5].
double fdk_drift(std::span<const std::int64_t> freqs, std::span<const int> reles, const EvalWeights& weights);

/// lambda * fak + mu * fdk.
double semantic_drift(double fak, double fdk, const EvalWeights& weights);

}  // namespace rbench
