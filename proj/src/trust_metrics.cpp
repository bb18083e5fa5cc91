#include "rbench/trust_metrics.hpp"

#include <algorithm>
#include <charconv>
#include <set>

#include <fmt/format.h>

#include "rbench/errors.hpp"

namespace rbench {
namespace {

bool is_alpha(char c) { return (c >= 'a' && c <= 'z') || (c >= 'A' && c <= 'Z'); }
bool is_digit(char c) { return c >= '0' && c <= '9'; }
bool is_alnum(char c) { return is_alpha(c) || is_digit(c); }
bool is_scheme_char(char c) { return is_alnum(c) || c == '+' || c == '-' || c == '.'; }
bool is_space(char c) { return c == ' ' || c == '\t' || c == '\n' || c == '\r' || c == '\f' || c == '\v'; }

char to_lower(char c) { return (c >= 'A' && c <= 'Z') ? static_cast<char>(c - 'A' + 'a') : c; }

std::string lowercase(std::string_view s) {
  std::string out(s);
  std::transform(out.begin(), out.end(), out.begin(), to_lower);
  return out;
}

bool is_host_char(char c) { return is_alnum(c) || c == '.' || c == '-' || c == '_' || c == '~' || c == '%'; }

bool is_span_terminator(char c) {
  auto u = static_cast<unsigned char>(c);
  if (u < 0x20 || u >= 0x7f) return true;
  switch (c) {
    case ' ': case '"': case '<': case '>': case '`': case '{': case '}': case '|': case '\\':
    case '^': case '[': case ']': case '(': case ')':
      return true;
    default:
      return false;
  }
}

bool is_trailing_punct(char c) {
  switch (c) {
    case '.': case ',': case ';': case ':': case '!': case '?': case '\'': case '*':
      return true;
    default:
      return false;
  }
}

[[noreturn]] void unparseable(std::string_view raw, std::string_view why) {
  throw UnparseableUrl(fmt::format("unparseable URL '{}': {}", raw, why));
}

int default_port(std::string_view scheme) {
  if (scheme == "http") return 80;
  if (scheme == "https") return 443;
  return -1;
}

}  // namespace

std::string normalize_url(std::string_view raw) {
  std::string_view s = raw;
  while (!s.empty() && is_space(s.front())) s.remove_prefix(1);
  while (!s.empty() && is_space(s.back())) s.remove_suffix(1);
  if (std::any_of(s.begin(), s.end(), [](char c) { return is_space(c) || static_cast<unsigned char>(c) < 0x20; })) {
    unparseable(raw, "contains whitespace");
  }

  auto sep = s.find("://");
  if (sep == std::string_view::npos || sep == 0) unparseable(raw, "missing scheme");
  std::string_view scheme_raw = s.substr(0, sep);
  if (!is_alpha(scheme_raw.front()) || !std::all_of(scheme_raw.begin(), scheme_raw.end(), is_scheme_char)) {
    unparseable(raw, "bad scheme");
  }
  std::string scheme = lowercase(scheme_raw);

  std::string_view rest = s.substr(sep + 3);
  auto auth_end = rest.find_first_of("/?#");
  std::string_view authority = rest.substr(0, auth_end);
  std::string_view tail = auth_end == std::string_view::npos ? std::string_view{} : rest.substr(auth_end);

  if (auto at = authority.rfind('@'); at != std::string_view::npos) authority = authority.substr(at + 1);

  std::string_view host_raw;
  std::string_view port_raw;
  if (!authority.empty() && authority.front() == '[') {
    auto close = authority.find(']');
    if (close == std::string_view::npos) unparseable(raw, "unterminated IPv6 host");
    host_raw = authority.substr(0, close + 1);
    std::string_view after = authority.substr(close + 1);
    if (!after.empty()) {
      if (after.front() != ':') unparseable(raw, "junk after IPv6 host");
      port_raw = after.substr(1);
    }
    auto inner = host_raw.substr(1, host_raw.size() - 2);
    if (inner.empty() || !std::all_of(inner.begin(), inner.end(), [](char c) { return is_alnum(c) || c == ':' || c == '.'; })) {
      unparseable(raw, "bad IPv6 host");
    }
  } else {
    auto colon = authority.find(':');
    host_raw = authority.substr(0, colon);
    if (colon != std::string_view::npos) port_raw = authority.substr(colon + 1);
    if (host_raw.empty() || !is_alnum(host_raw.front()) || !std::all_of(host_raw.begin(), host_raw.end(), is_host_char)) {
      unparseable(raw, "bad host");
    }
  }

  std::string host = lowercase(host_raw);
  while (host.size() > 4 && host.compare(0, 4, "www.") == 0) host.erase(0, 4);
  if (host.front() != '[' && !is_alnum(host.front())) unparseable(raw, "bad host");

  std::string port;
  if (!port_raw.empty()) {
    int value = 0;
    auto [ptr, ec] = std::from_chars(port_raw.data(), port_raw.data() + port_raw.size(), value);
    if (ec != std::errc{} || ptr != port_raw.data() + port_raw.size() || value < 0 || value > 65535) {
      unparseable(raw, "bad port");
    }
    if (value != default_port(scheme)) port = std::to_string(value);
  }

  std::string_view path = tail.substr(0, tail.find_first_of("?#"));
  while (!path.empty() && path.back() == '/') path.remove_suffix(1);

  std::string out;
  out.reserve(scheme.size() + 3 + host.size() + port.size() + 1 + path.size());
  out += scheme;
  out += "://";
  out += host;
  if (!port.empty()) {
    out += ':';
    out += port;
  }
  out += path.empty() ? std::string_view("/") : path;
  return out;
}

std::string hostname_of(std::string_view canonical) {
  auto sep = canonical.find("://");
  std::string_view rest = sep == std::string_view::npos ? canonical : canonical.substr(sep + 3);
  std::string_view authority = rest.substr(0, rest.find('/'));
  if (!authority.empty() && authority.front() == '[') {
    return std::string(authority.substr(0, authority.find(']') + 1));
  }
  return std::string(authority.substr(0, authority.find(':')));
}

std::vector<std::pair<std::size_t, std::size_t>> find_url_spans(std::string_view text) {
  std::vector<std::pair<std::size_t, std::size_t>> spans;
  std::size_t floor = 0;
  std::size_t pos = text.find("://");
  while (pos != std::string_view::npos) {
    std::size_t next_search = pos + 3;
    if (pos + 3 < text.size() && is_alnum(text[pos + 3])) {
      std::size_t start = pos;
      while (start > floor && is_scheme_char(text[start - 1])) --start;
      while (start < pos && !is_alpha(text[start])) ++start;
      if (start < pos) {
        std::size_t end = pos + 3;
        while (end < text.size() && !is_span_terminator(text[end])) ++end;
        while (end > pos + 4 && is_trailing_punct(text[end - 1])) --end;
        spans.emplace_back(start, end);
        floor = end;
        next_search = end;
      }
    }
    pos = text.find("://", next_search);
  }
  return spans;
}

TrustResult compute_trust(std::span<const std::string> tsls, std::span<const std::string> annotations,
                          const EvalWeights& weights, TrustFormula formula) {
  if (tsls.empty()) throw EmptyTsls("entry has no trustworthy-source links");

  std::set<std::string_view> tsl_set(tsls.begin(), tsls.end());
  std::set<std::string> tsl_hosts;
  for (const auto& t : tsls) tsl_hosts.insert(hostname_of(t));

  std::set<std::string_view> cited(annotations.begin(), annotations.end());

  TrustResult r;
  for (std::string_view t : tsl_set) {
    if (cited.count(t) != 0) ++r.match_full;
  }
  for (const auto& a : annotations) {
    if (tsl_hosts.count(hostname_of(a)) == 0) continue;
    if (formula == TrustFormula::kAlgorithm && tsl_set.count(a) != 0) continue;
    ++r.match_host_only;
  }

  const double s = static_cast<double>(tsl_set.size());
  const double t = static_cast<double>(annotations.size());
  r.rate_full_hit = static_cast<double>(r.match_full) / s;
  r.rate_host_hit = static_cast<double>(r.match_host_only) / (t + 1.0);
  r.boost = 1.0 + weights.eta * (weights.theta * r.rate_full_hit + weights.kappa * r.rate_host_hit);
  return r;
}

std::string_view to_string(TrustFormula formula) {
  return formula == TrustFormula::kAlgorithm ? "algorithm" : "body";
}

TrustFormula parse_trust_formula(std::string_view text) {
  if (text == "algorithm") return TrustFormula::kAlgorithm;
  if (text == "body") return TrustFormula::kBody;
  throw UsageError(fmt::format("unknown trust formula '{}' (expected algorithm or body)", text));
}

}  // namespace rbench
