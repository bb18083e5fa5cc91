#include "oracle.hpp"

#include <algorithm>
#include <cctype>
#include <regex>
#include <set>

namespace rbench::testkit {
namespace {

std::string lower(std::string s) {
  for (auto& c : s) c = static_cast<char>(std::tolower(static_cast<unsigned char>(c)));
  return s;
}

bool alnum(char c) { return std::isalnum(static_cast<unsigned char>(c)) != 0; }

std::string host_part(const std::string& canonical) {
  std::size_t start = canonical.find("://") + 3;
  std::size_t end = canonical.find_first_of(":/", start);
  return canonical.substr(start, end == std::string::npos ? std::string::npos : end - start);
}

std::int64_t brute_count(const std::string& text, const std::string& keyword) {
  std::int64_t n = 0;
  std::size_t i = 0;
  while (i + keyword.size() <= text.size()) {
    bool hit = text.compare(i, keyword.size(), keyword) == 0;
    if (hit && i > 0 && alnum(text[i - 1]) && alnum(keyword.front())) hit = false;
    std::size_t end = i + keyword.size();
    if (hit && end < text.size() && alnum(text[end]) && alnum(keyword.back())) hit = false;
    if (hit) {
      ++n;
      i = end;
    } else {
      ++i;
    }
  }
  return n;
}

double rational_value(const std::pair<std::int64_t, std::int64_t>& nd) {
  return static_cast<double>(nd.first) / static_cast<double>(nd.second);
}

}  // namespace

std::string oracle_canonical_url(const std::string& raw) {
  static const std::regex re(R"(^\s*([A-Za-z][A-Za-z0-9+.\-]*)://(?:[^@/?#\s]*@)?([A-Za-z0-9][A-Za-z0-9.\-]*)(?::(\d+))?([^?#\s]*)(?:\?[^#\s]*)?(?:#\S*)?\s*$)");
  std::smatch m;
  if (!std::regex_match(raw, m, re)) return {};
  std::string scheme = lower(m[1]);
  std::string host = lower(m[2]);
  while (host.rfind("www.", 0) == 0) host.erase(0, 4);
  std::string port = m[3];
  if ((scheme == "http" && port == "80") || (scheme == "https" && port == "443")) port.clear();
  std::string path = m[4];
  while (!path.empty() && path.back() == '/') path.pop_back();
  if (path.empty()) path = "/";
  return scheme + "://" + host + (port.empty() ? "" : ":" + port) + path;
}

OracleScore oracle_score(const BenchEntry& entry, const GrrCatalog& grrs, const ResponseBundle& bundle,
                         const VerdictTable& verdicts, const EvalWeights& w, bool body_formula) {
  OracleScore o;
  const auto& rubric_scores = verdicts.rubric.at(entry.id);
  const auto& relevance = verdicts.relevance.at(entry.id);

  long double qsr = 0, grr = 0;
  for (const auto& r : entry.qsrs) qsr += rational_value(rubric_scores.at(r.id));
  for (const auto& r : grrs.rubrics) grr += rational_value(rubric_scores.at(r.id));
  o.qsr_sum = static_cast<double>(qsr);
  o.grr_sum = static_cast<double>(grr);
  o.quality = w.alpha * o.qsr_sum / 30.0 + w.beta * o.grr_sum / 73.0;

  static const std::regex url_re(R"([A-Za-z][A-Za-z0-9+.\-]*://\S+)");
  static const std::regex marker_re(R"(\[\^?\d+(\s*,\s*\^?\d+)*\])");
  static const std::regex space_re(R"(\s+)");
  std::string text = std::regex_replace(bundle.report, url_re, " ");
  text = std::regex_replace(text, marker_re, "");
  text = std::regex_replace(lower(text), space_re, " ");

  double fak_sum = 0, fdk_sum = 0;
  for (const auto& k : entry.faks) {
    std::int64_t f = brute_count(text, lower(k));
    o.fak_freqs.push_back(f);
    fak_sum += std::min(static_cast<double>(f) / w.eps_plus, 1.0) * relevance.at(k) / 5.0;
  }
  for (const auto& k : entry.fdks) {
    std::int64_t f = brute_count(text, lower(k));
    o.fdk_freqs.push_back(f);
    fdk_sum += std::min(static_cast<double>(f) / w.eps_minus, 1.0) * relevance.at(k) / 5.0;
  }
  o.fak_drift = 1.0 - fak_sum / static_cast<double>(entry.faks.size());
  o.fdk_drift = fdk_sum / static_cast<double>(entry.fdks.size());
  o.semantic_drift = w.lambda * o.fak_drift + w.mu * o.fdk_drift;

  std::vector<std::string> links;
  for (const auto& a : bundle.annotations) {
    std::string c = oracle_canonical_url(a);
    if (!c.empty() && std::find(links.begin(), links.end(), c) == links.end()) links.push_back(c);
  }
  o.num_links = links.size();
  std::set<std::string> tsl_set(entry.tsls.begin(), entry.tsls.end());
  std::set<std::string> tsl_hosts;
  for (const auto& t : entry.tsls) tsl_hosts.insert(host_part(t));
  for (const auto& t : entry.tsls) {
    if (std::find(links.begin(), links.end(), t) != links.end()) ++o.match_full;
  }
  for (const auto& l : links) {
    bool same_host = tsl_hosts.count(host_part(l)) > 0;
    if (same_host && (body_formula || tsl_set.count(l) == 0)) ++o.match_host_only;
  }
  o.rate_full_hit = static_cast<double>(o.match_full) / static_cast<double>(entry.tsls.size());
  o.rate_host_hit = static_cast<double>(o.match_host_only) / static_cast<double>(links.size() + 1);
  o.boost = 1.0 + w.eta * (w.theta * o.rate_full_hit + w.kappa * o.rate_host_hit);

  o.integrated = o.quality * (1.0 - o.semantic_drift) * o.boost * 100.0;
  std::int64_t output_tokens = bundle.token_total - bundle.token_input;
  if (output_tokens > 0) o.contribution_per_token = o.integrated / static_cast<double>(output_tokens);
  if (bundle.trace) {
    o.retrieval_index = std::min(static_cast<double>(o.num_links) / static_cast<double>(bundle.trace->num_retrieved + 1), 1.0);
  }
  return o;
}

}  // namespace rbench::testkit
