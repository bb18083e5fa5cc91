#include "rbench/response_model.hpp"

#include <set>

#include <spdlog/spdlog.h>

#include "rbench/errors.hpp"
#include "rbench/trust_metrics.hpp"

namespace rbench {
namespace {

bool is_digit(char c) { return c >= '0' && c <= '9'; }

// Length of a citation marker starting at text[pos] ('['), or 0.
std::size_t marker_length(std::string_view text, std::size_t pos) {
  std::size_t i = pos + 1;
  auto number = [&]() {
    if (i < text.size() && text[i] == '^') ++i;
    std::size_t digits = 0;
    while (i < text.size() && is_digit(text[i])) {
      ++i;
      ++digits;
    }
    return digits > 0;
  };
  if (!number()) return 0;
  while (i < text.size() && text[i] == ',') {
    ++i;
    while (i < text.size() && text[i] == ' ') ++i;
    if (!number()) return 0;
  }
  if (i < text.size() && text[i] == ']') return i + 1 - pos;
  return 0;
}

std::string remove_urls_once(std::string_view text, bool& changed) {
  auto spans = find_url_spans(text);
  changed = !spans.empty();
  if (!changed) return std::string(text);
  std::string out;
  out.reserve(text.size());
  std::size_t cursor = 0;
  for (auto [b, e] : spans) {
    out.append(text.substr(cursor, b - cursor));
    cursor = e;
  }
  out.append(text.substr(cursor));
  return out;
}

std::string remove_markers(std::string_view text) {
  std::string out;
  out.reserve(text.size());
  for (std::size_t i = 0; i < text.size();) {
    if (text[i] == '[') {
      if (auto len = marker_length(text, i); len > 0) {
        i += len;
        continue;
      }
    }
    out.push_back(text[i]);
    ++i;
  }
  return out;
}

}  // namespace

std::string text_for_quality(const ResponseBundle& bundle) {
  if (bundle.annotations.empty()) return bundle.report;
  std::string out = bundle.report;
  out += "\n\nReferences:";
  for (std::size_t i = 0; i < bundle.annotations.size(); ++i) {
    out += '\n';
    out += std::to_string(i + 1);
    out += ". ";
    out += bundle.annotations[i];
  }
  return out;
}

std::string strip_urls_and_markers(std::string_view text) {
  // Removing a span joins its neighbours; repeat until nothing URL-like is left.
  std::string current(text);
  for (;;) {
    bool changed = false;
    std::string next = remove_markers(remove_urls_once(current, changed));
    if (!changed && next == current) return next;
    current = std::move(next);
  }
}

std::string text_for_drift(const ResponseBundle& bundle) { return strip_urls_and_markers(bundle.report); }

TrustLinks links_for_trust(const ResponseBundle& bundle) {
  TrustLinks out;
  std::set<std::string> seen;
  for (const auto& raw : bundle.annotations) {
    try {
      std::string canonical = normalize_url(raw);
      if (seen.insert(canonical).second) out.links.push_back(std::move(canonical));
    } catch (const UnparseableUrl&) {
      ++out.dropped;
    }
  }
  if (out.dropped > 0) {
    spdlog::warn("{}/{}: dropped {} unparseable annotation(s)", bundle.model_name, bundle.entry_id, out.dropped);
  }
  return out;
}

std::vector<std::string> harvest_inline_urls(std::string_view report) {
  std::vector<std::string> out;
  for (auto [b, e] : find_url_spans(report)) out.emplace_back(report.substr(b, e - b));
  return out;
}

}  // namespace rbench
