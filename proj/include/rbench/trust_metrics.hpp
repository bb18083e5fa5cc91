#pragma once

#include <cstddef>
#include <span>
#include <string>
#include <string_view>
#include <utility>
#include <vector>

#include "rbench/weights.hpp"

namespace rbench {

/// Canonical form used for all link matching.
///
/// Lowercases scheme and host, strips leading "www." labels, drops userinfo,
/// query string, fragment, the scheme's default port (http:80, https:443) and
/// trailing slashes. Path case is preserved. The result is
/// scheme://host[:port][/path] and normalize_url is idempotent.
///
/// Throws UnparseableUrl when no scheme://host can be recognised.
std::string normalize_url(std::string_view raw);

/// Host of a canonical URL, without port.
std::string hostname_of(std::string_view canonical);

/// Byte ranges [begin, end) of URL-like spans inside free text: a scheme,
/// "://", then an alphanumeric host start. Spans stop at whitespace, quotes,
/// angle/round/square/curly brackets, and drop trailing sentence punctuation.
std::vector<std::pair<std::size_t, std::size_t>> find_url_spans(std::string_view text);

/// Which host-hit numerator to use.
///  kAlgorithm: annotations whose host matches a TSL host but that are not
///              exact TSL hits (exact hits are not counted twice).
///  kBody:      every annotation whose host matches a TSL host.
enum class TrustFormula { kAlgorithm, kBody };

struct TrustResult {
  std::size_t match_full = 0;        // distinct TSLs exactly cited
  std::size_t match_host_only = 0;   // host-hit numerator per TrustFormula
  double rate_full_hit = 0.0;
  double rate_host_hit = 0.0;
  double boost = 1.0;

  friend bool operator==(const TrustResult&, const TrustResult&) = default;
};

/// Trustworthiness boost of cited links against the entry's TSLs.
/// Both inputs must already be canonical. Throws EmptyTsls when tsls is empty.
TrustResult compute_trust(std::span<const std::string> tsls, std::span<const std::string> annotations,
                          const EvalWeights& weights, TrustFormula formula = TrustFormula::kAlgorithm);

std::string_view to_string(TrustFormula formula);
TrustFormula parse_trust_formula(std::string_view text);

}  // namespace rbench
