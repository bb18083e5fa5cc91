#pragma once

#include <cstdint>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

namespace rbench {

/// Optional retrieval metadata reported by agent systems.
struct Trace {
  std::int64_t reason_times = 0;
  std::int64_t search_times = 0;
  std::int64_t num_retrieved = 0;

  friend bool operator==(const Trace&, const Trace&) = default;
};

/// One model's answer to one benchmark entry.
struct ResponseBundle {
  std::string entry_id;
  std::string model_name;
  std::string report;
  std::vector<std::string> annotations;  // raw, in citation order
  std::int64_t token_input = 0;
  std::int64_t token_total = 0;
  std::optional<Trace> trace;
};

/// Report followed by a numbered "References:" section listing every
/// annotation in order. The report is returned unchanged when there are no
/// annotations.
std::string text_for_quality(const ResponseBundle& bundle);

/// Report with inline URL spans and bracketed citation markers ("[3]",
/// "[^3]", "[1, 2]") removed. Never appends references.
std::string text_for_drift(const ResponseBundle& bundle);

/// Same stripping as text_for_drift, applied to arbitrary text.
std::string strip_urls_and_markers(std::string_view text);

struct TrustLinks {
  std::vector<std::string> links;  // canonical, first occurrence order
  std::size_t dropped = 0;         // annotations that failed to parse
};

/// Canonicalizes every annotation and removes duplicates.
TrustLinks links_for_trust(const ResponseBundle& bundle);

/// Inline URLs harvested from report text, in order of appearance. Fallback
/// for bundles that arrive without an annotation list.
std::vector<std::string> harvest_inline_urls(std::string_view report);

}  // namespace rbench
