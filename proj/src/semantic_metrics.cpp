#include "rbench/semantic_metrics.hpp"

#include <algorithm>
#include <locale>
#include <stdexcept>

#include <fmt/format.h>

#include "rbench/bench_model.hpp"
#include "rbench/errors.hpp"

namespace rbench {
namespace {

const std::ctype<wchar_t>& unicode_ctype() {
  static const std::locale loc = [] {
    for (const char* name : {"C.UTF-8", "C.utf8", "en_US.UTF-8"}) {
      try {
        return std::locale(name);
      } catch (const std::runtime_error&) {
      }
    }
    return std::locale::classic();
  }();
  return std::use_facet<std::ctype<wchar_t>>(loc);
}

bool is_unicode_space(char32_t cp) {
  return cp == U' ' || (cp >= 0x09 && cp <= 0x0d) || cp == 0x85 || cp == 0xa0 || cp == 0x1680 ||
         (cp >= 0x2000 && cp <= 0x200a) || cp == 0x2028 || cp == 0x2029 || cp == 0x202f || cp == 0x205f ||
         cp == 0x3000;
}

bool is_unspaced_script(char32_t cp) {
  return (cp >= 0x0e00 && cp <= 0x0e7f) ||    // Thai
         (cp >= 0x3040 && cp <= 0x30ff) ||    // Hiragana, Katakana
         (cp >= 0x3400 && cp <= 0x4dbf) ||    // CJK extension A
         (cp >= 0x4e00 && cp <= 0x9fff) ||    // CJK unified
         (cp >= 0xf900 && cp <= 0xfaff) ||    // CJK compatibility
         (cp >= 0x20000 && cp <= 0x2fa1f);    // CJK extensions B..
}

bool is_word_char(char32_t cp) {
  if (cp < 0x80) {
    return (cp >= U'a' && cp <= U'z') || (cp >= U'A' && cp <= U'Z') || (cp >= U'0' && cp <= U'9');
  }
  return unicode_ctype().is(std::ctype_base::alnum, static_cast<wchar_t>(cp));
}

bool needs_boundary(char32_t cp) { return is_word_char(cp) && !is_unspaced_script(cp); }

char32_t fold(char32_t cp) {
  if (cp < 0x80) return (cp >= U'A' && cp <= U'Z') ? cp + 32 : cp;
  return static_cast<char32_t>(unicode_ctype().tolower(static_cast<wchar_t>(cp)));
}

// Decodes UTF-8, replacing invalid sequences with U+FFFD.
std::u32string decode_utf8(std::string_view s) {
  std::u32string out;
  out.reserve(s.size());
  for (std::size_t i = 0; i < s.size();) {
    auto b0 = static_cast<unsigned char>(s[i]);
    int len = b0 < 0x80 ? 1 : (b0 >> 5) == 0x6 ? 2 : (b0 >> 4) == 0xe ? 3 : (b0 >> 3) == 0x1e ? 4 : 0;
    if (len == 0 || i + static_cast<std::size_t>(len) > s.size()) {
      out.push_back(0xfffd);
      ++i;
      continue;
    }
    char32_t cp = len == 1 ? b0 : len == 2 ? (b0 & 0x1f) : len == 3 ? (b0 & 0x0f) : (b0 & 0x07);
    bool ok = true;
    for (int k = 1; k < len; ++k) {
      auto b = static_cast<unsigned char>(s[i + static_cast<std::size_t>(k)]);
      if ((b & 0xc0) != 0x80) {
        ok = false;
        break;
      }
      cp = (cp << 6) | (b & 0x3f);
    }
    if (!ok) {
      out.push_back(0xfffd);
      ++i;
      continue;
    }
    out.push_back(cp);
    i += static_cast<std::size_t>(len);
  }
  return out;
}

std::u32string fold_collapse(std::string_view text) {
  std::u32string out;
  out.reserve(text.size());
  bool in_space = false;
  for (char32_t cp : decode_utf8(text)) {
    if (is_unicode_space(cp)) {
      if (!in_space) out.push_back(U' ');
      in_space = true;
      continue;
    }
    in_space = false;
    out.push_back(fold(cp));
  }
  return out;
}

double keyword_term(std::int64_t freq, int rele, double eps) {
  if (freq < 0) throw std::invalid_argument(fmt::format("negative keyword frequency {}", freq));
  if (rele < kMinRelevance || rele > kMaxRelevance) {
    throw std::invalid_argument(fmt::format("relevance {} outside 1..5", rele));
  }
  double saturation = std::min(static_cast<double>(freq) / eps, 1.0);
  return saturation * (static_cast<double>(rele) / kMaxRelevance);
}

double mean_keyword_term(std::span<const std::int64_t> freqs, std::span<const int> reles, double eps) {
  if (freqs.empty() || freqs.size() != reles.size()) {
    throw std::invalid_argument(fmt::format("keyword stats size mismatch ({} freqs, {} reles)", freqs.size(), reles.size()));
  }
  if (!(eps > 0.0)) throw std::invalid_argument("expectation scale must be positive");
  double sum = 0.0;
  for (std::size_t i = 0; i < freqs.size(); ++i) sum += keyword_term(freqs[i], reles[i], eps);
  return sum / static_cast<double>(freqs.size());
}

}  // namespace

double ratio_normalize(const Rational& sum, const Rational& max_total) {
  if (!(max_total > Rational{})) throw OutOfRange("ratio maximum must be positive");
  if (sum < Rational{} || sum > max_total) {
    throw OutOfRange(fmt::format("score sum {} outside [0, {}]", sum.to_string(), max_total.to_string()));
  }
  return sum.to_double() / max_total.to_double();
}

double compute_quality(const Rational& qsr_sum, const Rational& grr_sum, const EvalWeights& weights) {
  return weights.alpha * ratio_normalize(qsr_sum, Rational(kQsrTotalPoints)) +
         weights.beta * ratio_normalize(grr_sum, Rational(kGrrTotalPoints));
}

FoldedText::FoldedText(std::string_view text) : folded_(fold_collapse(text)) {}

std::int64_t FoldedText::count(std::string_view keyword) const {
  std::u32string needle = fold_collapse(keyword);
  while (!needle.empty() && needle.front() == U' ') needle.erase(needle.begin());
  while (!needle.empty() && needle.back() == U' ') needle.pop_back();
  if (needle.empty()) throw std::invalid_argument("keyword must not be blank");

  const bool guard_front = needs_boundary(needle.front());
  const bool guard_back = needs_boundary(needle.back());
  std::int64_t hits = 0;
  std::size_t pos = 0;
  while ((pos = folded_.find(needle, pos)) != std::u32string::npos) {
    std::size_t end = pos + needle.size();
    bool left_ok = !guard_front || pos == 0 || !needs_boundary(folded_[pos - 1]);
    bool right_ok = !guard_back || end == folded_.size() || !needs_boundary(folded_[end]);
    if (left_ok && right_ok) {
      ++hits;
      pos = end;
    } else {
      ++pos;
    }
  }
  return hits;
}

std::int64_t keyword_frequency(std::string_view text, std::string_view keyword) {
  return FoldedText(text).count(keyword);
}

double fak_drift(std::span<const std::int64_t> freqs, std::span<const int> reles, const EvalWeights& weights) {
  return 1.0 - mean_keyword_term(freqs, reles, weights.eps_plus);
}

double fdk_drift(std::span<const std::int64_t> freqs, std::span<const int> reles, const EvalWeights& weights) {
  return mean_keyword_term(freqs, reles, weights.eps_minus);
}

double semantic_drift(double fak, double fdk, const EvalWeights& weights) {
  if (fak < 0.0 || fak > 1.0 || fdk < 0.0 || fdk > 1.0) {
    throw OutOfRange(fmt::format("drift components ({}, {}) outside [0, 1]", fak, fdk));
  }
  // Keep the convex combination inside its hull despite rounding.
  return std::clamp(weights.lambda * fak + weights.mu * fdk, std::min(fak, fdk), std::max(fak, fdk));
}

}  // namespace rbench
