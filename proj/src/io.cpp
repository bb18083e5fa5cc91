#include "rbench/io.hpp"

#include <array>
#include <fstream>
#include <set>
#include <sstream>

#include <fmt/format.h>
#include <openssl/evp.h>
#include <spdlog/spdlog.h>

#include "rbench/errors.hpp"
#include "rbench/json_support.hpp"

namespace rbench {
namespace {

using nlohmann::json;

const json& require(const json& j, const char* key) {
  auto it = j.find(key);
  if (it == j.end()) throw SchemaViolation(fmt::format("missing field '{}'", key));
  return *it;
}

std::string require_string(const json& j, const char* key) {
  const json& v = require(j, key);
  if (!v.is_string()) throw SchemaViolation(fmt::format("field '{}' must be a string", key));
  return v.get<std::string>();
}

std::int64_t require_int(const json& j, const char* key) {
  const json& v = require(j, key);
  if (!v.is_number_integer()) throw SchemaViolation(fmt::format("field '{}' must be an integer", key));
  return v.get<std::int64_t>();
}

std::vector<std::string> string_list(const json& j, const char* key) {
  const json& v = require(j, key);
  if (!v.is_array()) throw SchemaViolation(fmt::format("field '{}' must be an array", key));
  std::vector<std::string> out;
  for (const auto& item : v) {
    if (!item.is_string()) throw SchemaViolation(fmt::format("field '{}' must hold strings", key));
    out.push_back(item.get<std::string>());
  }
  return out;
}

// Entry ids such as "07001" are sometimes written as bare numbers.
std::string id_field(const json& j, const char* key) {
  const json& v = require(j, key);
  if (v.is_string()) return v.get<std::string>();
  if (v.is_number_integer()) return std::to_string(v.get<std::int64_t>());
  throw SchemaViolation(fmt::format("field '{}' must be a string", key));
}

json optional_number(const std::optional<double>& v) { return v ? json(*v) : json(nullptr); }

std::optional<double> read_optional_number(const json& j, const char* key) {
  auto it = j.find(key);
  if (it == j.end() || it->is_null()) return std::nullopt;
  return it->get<double>();
}

TargetKind parse_target_kind(const std::string& s) {
  if (s == "qsr") return TargetKind::kQsr;
  if (s == "grr") return TargetKind::kGrr;
  if (s == "fak") return TargetKind::kFak;
  if (s == "fdk") return TargetKind::kFdk;
  throw SchemaViolation(fmt::format("unknown target kind '{}'", s));
}

template <typename F>
void for_each_line(const std::filesystem::path& path, F&& fn) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw FileUnreadable(fmt::format("cannot read {}", path.string()));
  std::string line;
  std::size_t lineno = 0;
  while (std::getline(in, line)) {
    ++lineno;
    if (!line.empty() && line.back() == '\r') line.pop_back();
    if (line.find_first_not_of(" \t") == std::string::npos) continue;
    fn(lineno, line);
  }
}

json parse_line(const std::filesystem::path& path, std::size_t lineno, const std::string& line) {
  try {
    return json::parse(line);
  } catch (const json::exception& e) {
    throw SchemaViolation(fmt::format("{}:{}: {}", path.string(), lineno, e.what()));
  }
}

json rubric_scores_to_json(const std::vector<RubricScore>& v) {
  json out = json::array();
  for (const auto& r : v) out.push_back({{"id", r.id}, {"score", rational_to_json(r.score)}, {"judged", r.judged}});
  return out;
}

std::vector<RubricScore> rubric_scores_from_json(const json& j) {
  std::vector<RubricScore> out;
  for (const auto& r : j) out.push_back({r.at("id").get<std::string>(), rational_from_json(r.at("score")), r.at("judged").get<bool>()});
  return out;
}

json keyword_stats_to_json(const std::vector<KeywordStat>& v) {
  json out = json::array();
  for (const auto& k : v) {
    out.push_back({{"keyword", k.keyword}, {"frequency", k.frequency}, {"relevance", k.relevance}, {"judged", k.judged}});
  }
  return out;
}

std::vector<KeywordStat> keyword_stats_from_json(const json& j) {
  std::vector<KeywordStat> out;
  for (const auto& k : j) {
    out.push_back({k.at("keyword").get<std::string>(), k.at("frequency").get<std::int64_t>(), k.at("relevance").get<int>(),
                   k.at("judged").get<bool>()});
  }
  return out;
}

json trace_to_json(const Trace& t) {
  return {{"reason_times", t.reason_times}, {"search_times", t.search_times}, {"num_retrieved", t.num_retrieved}};
}

Trace trace_from_json(const json& j) {
  if (!j.is_object()) throw SchemaViolation("trace must be an object");
  Trace t;
  t.reason_times = require_int(j, "reason_times");
  t.search_times = require_int(j, "search_times");
  t.num_retrieved = require_int(j, "num_retrieved");
  if (t.reason_times < 0 || t.search_times < 0 || t.num_retrieved < 0) {
    throw SchemaViolation("trace counts must be non-negative");
  }
  return t;
}

}  // namespace

Rubric rubric_from_json(const json& j) {
  if (!j.is_object()) throw SchemaViolation("rubric must be an object");
  Rubric r;
  r.id = id_field(j, "id");
  r.text = require_string(j, "text");
  const json& scores = require(j, "allowed_scores");
  if (!scores.is_array()) throw SchemaViolation("allowed_scores must be an array");
  for (const auto& s : scores) r.allowed_scores.push_back(rational_from_json(s));
  return r;
}

json rubric_to_json(const Rubric& r) {
  json scores = json::array();
  for (const auto& s : r.allowed_scores) scores.push_back(rational_to_json(s));
  return {{"id", r.id}, {"text", r.text}, {"allowed_scores", scores}};
}

BenchEntry entry_from_json(const json& j) {
  if (!j.is_object()) throw SchemaViolation("entry must be an object");
  BenchEntry e;
  e.id = id_field(j, "id");
  e.domain_code = static_cast<int>(require_int(j, "domain_code"));
  e.query = require_string(j, "query");
  const json& qsrs = require(j, "qsrs");
  if (!qsrs.is_array()) throw SchemaViolation("qsrs must be an array");
  for (const auto& q : qsrs) e.qsrs.push_back(rubric_from_json(q));
  e.tsls = string_list(j, "tsls");
  e.faks = string_list(j, "faks");
  e.fdks = string_list(j, "fdks");
  return e;
}

json entry_to_json(const BenchEntry& e) {
  json qsrs = json::array();
  for (const auto& q : e.qsrs) qsrs.push_back(rubric_to_json(q));
  return {{"id", e.id}, {"domain_code", e.domain_code}, {"query", e.query}, {"qsrs", qsrs},
          {"tsls", e.tsls}, {"faks", e.faks}, {"fdks", e.fdks}};
}

GrrCatalog grr_catalog_from_json(const json& j) {
  if (!j.is_object()) throw SchemaViolation("GRR catalog must be an object");
  const json& rubrics = require(j, "rubrics");
  if (!rubrics.is_array()) throw SchemaViolation("rubrics must be an array");
  GrrCatalog c;
  for (const auto& r : rubrics) c.rubrics.push_back(rubric_from_json(r));
  return c;
}

json grr_catalog_to_json(const GrrCatalog& c) {
  json rubrics = json::array();
  for (const auto& r : c.rubrics) rubrics.push_back(rubric_to_json(r));
  return {{"rubrics", rubrics}};
}

ResponseBundle response_from_json(const json& j) {
  if (!j.is_object()) throw SchemaViolation("response must be an object");
  ResponseBundle b;
  b.entry_id = id_field(j, "entry_id");
  if (auto it = j.find("model_name"); it != j.end()) {
    if (!it->is_string()) throw SchemaViolation("field 'model_name' must be a string");
    b.model_name = it->get<std::string>();
  }
  b.report = require_string(j, "report");
  if (j.contains("annotations")) {
    b.annotations = string_list(j, "annotations");
  } else {
    b.annotations = harvest_inline_urls(b.report);
  }
  b.token_input = require_int(j, "token_input");
  b.token_total = require_int(j, "token_total");
  if (b.token_input < 0) throw SchemaViolation("token_input must be non-negative");
  if (b.token_total < b.token_input) {
    throw SchemaViolation(fmt::format("token_total {} < token_input {}", b.token_total, b.token_input));
  }
  if (auto it = j.find("trace"); it != j.end() && !it->is_null()) b.trace = trace_from_json(*it);
  return b;
}

json response_to_json(const ResponseBundle& b) {
  json j = {{"entry_id", b.entry_id},       {"model_name", b.model_name},   {"report", b.report},
            {"annotations", b.annotations}, {"token_input", b.token_input}, {"token_total", b.token_total}};
  if (b.trace) j["trace"] = trace_to_json(*b.trace);
  return j;
}

json score_to_json(const EntryScore& s, std::string_view run_id) {
  json incomplete = json::array();
  for (const auto& f : s.incomplete) {
    incomplete.push_back({{"kind", to_string(f.kind)}, {"target", f.target}, {"error_kind", f.error_kind}, {"detail", f.detail}});
  }
  return {
      {"run_id", run_id},
      {"entry_id", s.entry_id},
      {"model_name", s.model_name},
      {"domain_code", s.domain_code},
      {"qsr_sum", rational_to_json(s.qsr_sum)},
      {"grr_sum", rational_to_json(s.grr_sum)},
      {"quality", s.quality},
      {"fak_drift", s.fak_drift},
      {"fdk_drift", s.fdk_drift},
      {"semantic_drift", s.semantic_drift},
      {"trust",
       {{"match_full", s.trust.match_full},
        {"match_host_only", s.trust.match_host_only},
        {"rate_full_hit", s.trust.rate_full_hit},
        {"rate_host_hit", s.trust.rate_host_hit},
        {"boost", s.trust.boost}}},
      {"num_links", s.num_links},
      {"dropped_links", s.dropped_links},
      {"integrated", s.integrated},
      {"contribution_per_token", optional_number(s.contribution_per_token)},
      {"retrieval_index", optional_number(s.retrieval_index)},
      {"token_input", s.token_input},
      {"token_total", s.token_total},
      {"trace", s.trace ? trace_to_json(*s.trace) : json(nullptr)},
      {"qsr_scores", rubric_scores_to_json(s.qsr_scores)},
      {"grr_scores", rubric_scores_to_json(s.grr_scores)},
      {"fak_stats", keyword_stats_to_json(s.fak_stats)},
      {"fdk_stats", keyword_stats_to_json(s.fdk_stats)},
      {"incomplete", incomplete},
  };
}

EntryScore score_from_json(const json& j) {
  try {
    EntryScore s;
    s.entry_id = j.at("entry_id").get<std::string>();
    s.model_name = j.at("model_name").get<std::string>();
    s.domain_code = j.at("domain_code").get<int>();
    s.qsr_sum = rational_from_json(j.at("qsr_sum"));
    s.grr_sum = rational_from_json(j.at("grr_sum"));
    s.quality = j.at("quality").get<double>();
    s.fak_drift = j.at("fak_drift").get<double>();
    s.fdk_drift = j.at("fdk_drift").get<double>();
    s.semantic_drift = j.at("semantic_drift").get<double>();
    const json& t = j.at("trust");
    s.trust.match_full = t.at("match_full").get<std::size_t>();
    s.trust.match_host_only = t.at("match_host_only").get<std::size_t>();
    s.trust.rate_full_hit = t.at("rate_full_hit").get<double>();
    s.trust.rate_host_hit = t.at("rate_host_hit").get<double>();
    s.trust.boost = t.at("boost").get<double>();
    s.num_links = j.at("num_links").get<std::size_t>();
    s.dropped_links = j.at("dropped_links").get<std::size_t>();
    s.integrated = j.at("integrated").get<double>();
    s.contribution_per_token = read_optional_number(j, "contribution_per_token");
    s.retrieval_index = read_optional_number(j, "retrieval_index");
    s.token_input = j.at("token_input").get<std::int64_t>();
    s.token_total = j.at("token_total").get<std::int64_t>();
    if (auto it = j.find("trace"); it != j.end() && !it->is_null()) s.trace = trace_from_json(*it);
    s.qsr_scores = rubric_scores_from_json(j.at("qsr_scores"));
    s.grr_scores = rubric_scores_from_json(j.at("grr_scores"));
    s.fak_stats = keyword_stats_from_json(j.at("fak_stats"));
    s.fdk_stats = keyword_stats_from_json(j.at("fdk_stats"));
    for (const auto& f : j.at("incomplete")) {
      s.incomplete.push_back({parse_target_kind(f.at("kind").get<std::string>()), f.at("target").get<std::string>(),
                              f.at("error_kind").get<std::string>(), f.at("detail").get<std::string>()});
    }
    return s;
  } catch (const json::exception& e) {
    throw SchemaViolation(fmt::format("score record: {}", e.what()));
  }
}

json means_to_json(const ScoreMeans& m) {
  return {{"n_entries", m.n_entries},
          {"mean_quality", m.mean_quality},
          {"mean_one_minus_drift", m.mean_one_minus_drift},
          {"mean_boost", m.mean_boost},
          {"mean_integrated", m.mean_integrated},
          {"mean_usage_tokens", m.mean_usage_tokens},
          {"mean_contribution_per_token", optional_number(m.mean_contribution_per_token)},
          {"product_of_means", m.product_of_means()}};
}

namespace {

ScoreMeans means_from_json(const json& j) {
  ScoreMeans m;
  m.n_entries = j.at("n_entries").get<std::size_t>();
  m.mean_quality = j.at("mean_quality").get<double>();
  m.mean_one_minus_drift = j.at("mean_one_minus_drift").get<double>();
  m.mean_boost = j.at("mean_boost").get<double>();
  m.mean_integrated = j.at("mean_integrated").get<double>();
  m.mean_usage_tokens = j.at("mean_usage_tokens").get<double>();
  m.mean_contribution_per_token = read_optional_number(j, "mean_contribution_per_token");
  return m;
}

}  // namespace

json aggregate_to_json(const ModelAggregate& a) {
  json per_domain = json::object();
  for (const auto& [domain, means] : a.per_domain) per_domain[fmt::format("{:02}", domain)] = means_to_json(means);
  json j = means_to_json(a.means);
  j["model_name"] = a.model_name;
  j["per_domain"] = per_domain;
  j["mean_reason_times"] = optional_number(a.mean_reason_times);
  j["mean_search_times"] = optional_number(a.mean_search_times);
  j["mean_retrieval_index"] = optional_number(a.mean_retrieval_index);
  j["n_incomplete"] = a.n_incomplete;
  return j;
}

ModelAggregate aggregate_from_json(const json& j) {
  try {
    ModelAggregate a;
    a.model_name = j.at("model_name").get<std::string>();
    a.means = means_from_json(j);
    for (const auto& [domain, means] : j.at("per_domain").items()) a.per_domain[std::stoi(domain)] = means_from_json(means);
    a.mean_reason_times = read_optional_number(j, "mean_reason_times");
    a.mean_search_times = read_optional_number(j, "mean_search_times");
    a.mean_retrieval_index = read_optional_number(j, "mean_retrieval_index");
    a.n_incomplete = j.at("n_incomplete").get<std::size_t>();
    return a;
  } catch (const json::exception& e) {
    throw SchemaViolation(fmt::format("aggregate record: {}", e.what()));
  }
}

std::string dump_line(const json& j) { return j.dump(-1, ' ', false, json::error_handler_t::replace); }

LoadedBench load_entries(const std::filesystem::path& entries_path, const std::filesystem::path& grr_path) {
  LoadedBench out;

  std::ifstream grr_in(grr_path);
  if (!grr_in) throw FileUnreadable(fmt::format("cannot read GRR catalog {}", grr_path.string()));
  try {
    out.grrs = grr_catalog_from_json(json::parse(grr_in));
  } catch (const json::exception& e) {
    throw SchemaViolation(fmt::format("{}: {}", grr_path.string(), e.what()));
  }
  out.grr_violations = validate_grr_catalog(out.grrs);

  std::set<std::string> ids;
  for_each_line(entries_path, [&](std::size_t lineno, const std::string& line) {
    BenchEntry entry;
    try {
      entry = entry_from_json(parse_line(entries_path, lineno, line));
    } catch (const SchemaViolation& e) {
      throw SchemaViolation(fmt::format("{}:{}: {}", entries_path.string(), lineno, e.what()));
    }
    ValidationReport report = validate_entry(entry);
    if (!ids.insert(entry.id).second) report.push_back({ViolationCode::kEntryId, fmt::format("duplicate entry id '{}'", entry.id)});
    if (!report.empty()) {
      spdlog::warn("{}:{}: skipping entry '{}' ({} violation(s), first: {})", entries_path.string(), lineno, entry.id,
                   report.size(), to_string(report.front().code));
      out.skipped.push_back({lineno, entry.id, std::move(report)});
      return;
    }
    out.entries.push_back(std::move(entry));
  });
  return out;
}

std::vector<ResponseBundle> load_responses(const std::filesystem::path& path, const std::string& model_name) {
  std::vector<ResponseBundle> out;
  std::set<std::string> ids;
  for_each_line(path, [&](std::size_t lineno, const std::string& line) {
    ResponseBundle b;
    try {
      b = response_from_json(parse_line(path, lineno, line));
    } catch (const SchemaViolation& e) {
      throw SchemaViolation(fmt::format("{}:{}: {}", path.string(), lineno, e.what()));
    }
    if (b.model_name.empty()) b.model_name = model_name;
    if (!model_name.empty() && b.model_name != model_name) {
      throw SchemaViolation(fmt::format("{}:{}: response from model '{}' in a '{}' response set", path.string(), lineno,
                                        b.model_name, model_name));
    }
    if (!ids.insert(b.entry_id).second) {
      throw DuplicateResponse(fmt::format("{}:{}: second response for entry '{}'", path.string(), lineno, b.entry_id));
    }
    out.push_back(std::move(b));
  });
  return out;
}

BenchEntry find_entry(const std::filesystem::path& entries_path, const std::string& id) {
  std::optional<BenchEntry> found;
  for_each_line(entries_path, [&](std::size_t lineno, const std::string& line) {
    if (found) return;
    BenchEntry e = entry_from_json(parse_line(entries_path, lineno, line));
    if (e.id == id) found = std::move(e);
  });
  if (!found) throw UsageError(fmt::format("no entry '{}' in {}", id, entries_path.string()));
  return std::move(*found);
}

ResponseBundle find_response(const std::filesystem::path& responses_path, const std::string& entry_id) {
  std::optional<ResponseBundle> found;
  for_each_line(responses_path, [&](std::size_t lineno, const std::string& line) {
    if (found) return;
    ResponseBundle b = response_from_json(parse_line(responses_path, lineno, line));
    if (b.entry_id == entry_id) found = std::move(b);
  });
  if (!found) throw UsageError(fmt::format("no response for entry '{}' in {}", entry_id, responses_path.string()));
  return std::move(*found);
}

ScoreFile load_scores(const std::filesystem::path& path) {
  std::vector<std::pair<std::size_t, std::string>> lines;
  for_each_line(path, [&](std::size_t lineno, const std::string& line) { lines.emplace_back(lineno, line); });

  ScoreFile out;
  std::set<std::string> seen_runs;
  for (std::size_t i = 0; i < lines.size(); ++i) {
    const auto& [lineno, line] = lines[i];
    json j;
    try {
      j = json::parse(line);
      out.scores.push_back(score_from_json(j));
    } catch (const std::exception& e) {
      if (i + 1 == lines.size()) {
        ++out.truncated_lines;
        spdlog::warn("{}:{}: dropping incomplete trailing record", path.string(), lineno);
        break;
      }
      throw SchemaViolation(fmt::format("{}:{}: {}", path.string(), lineno, e.what()));
    }
    std::string run_id = j.value("run_id", "");
    if (seen_runs.insert(run_id).second) out.run_ids.push_back(run_id);
  }
  return out;
}

std::string sha256_hex(std::string_view data) {
  std::array<unsigned char, EVP_MAX_MD_SIZE> digest{};
  unsigned int len = 0;
  if (EVP_Digest(data.data(), data.size(), digest.data(), &len, EVP_sha256(), nullptr) != 1) {
    throw Error("SHA-256 computation failed");
  }
  std::string hex;
  hex.reserve(len * 2);
  for (unsigned int i = 0; i < len; ++i) hex += fmt::format("{:02x}", digest[i]);
  return hex;
}

std::string sha256_file(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw FileUnreadable(fmt::format("cannot read {}", path.string()));
  std::ostringstream buf;
  buf << in.rdbuf();
  return sha256_hex(buf.str());
}

void write_file_atomic(const std::filesystem::path& path, std::string_view content) {
  auto tmp = path;
  tmp += ".tmp";
  {
    std::ofstream out(tmp, std::ios::binary | std::ios::trunc);
    if (!out) throw FileUnreadable(fmt::format("cannot write {}", tmp.string()));
    out.write(content.data(), static_cast<std::streamsize>(content.size()));
    if (!out) throw FileUnreadable(fmt::format("short write to {}", tmp.string()));
  }
  std::filesystem::rename(tmp, path);
}

}  // namespace rbench
