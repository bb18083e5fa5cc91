#include "synthetic.hpp"

#include <algorithm>
#include <fstream>
#include <set>

#include <fmt/format.h>
#include <nlohmann/json.hpp>

#include "rbench/io.hpp"
#include "rbench/json_support.hpp"

namespace rbench::testkit {
namespace {

const std::vector<std::string> kFiller = {
    "the",     "report",  "analysis", "of",     "market",   "shows",   "growth",   "across", "regions",  "with",
    "strong",  "demand",  "for",      "new",    "policy",   "and",     "recent",   "data",   "suggests", "that",
    "costs",   "remain",  "high",     "while",  "adoption", "expands", "in",       "urban",  "areas",    "experts",
    "note",    "several", "risks",    "linked", "to",       "supply",  "capacity", "over",   "time",     "overall"};

const std::vector<std::string> kSyllables = {"ka", "lo", "mi", "ru", "te", "sa", "vo", "ne", "pi", "du", "ze", "bo"};

template <typename T>
T uniform(std::mt19937_64& rng, T lo, T hi) {
  return std::uniform_int_distribution<T>(lo, hi)(rng);
}

bool chance(std::mt19937_64& rng, double p) { return std::bernoulli_distribution(p)(rng); }

std::string pseudo_word(std::mt19937_64& rng) {
  std::string w;
  int n = uniform(rng, 3, 4);
  for (int i = 0; i < n; ++i) w += kSyllables[uniform<std::size_t>(rng, 0, kSyllables.size() - 1)];
  return w;
}

// Keywords whose words never repeat within an entry and never collide with filler.
std::vector<std::string> make_keywords(std::mt19937_64& rng, std::size_t n, std::set<std::string>& used_words) {
  std::vector<std::string> out;
  auto fresh_word = [&] {
    for (;;) {
      std::string w = pseudo_word(rng);
      if (used_words.insert(w).second) return w;
    }
  };
  while (out.size() < n) {
    std::string k = fresh_word();
    if (chance(rng, 0.3)) k += " " + fresh_word();
    out.push_back(k);
  }
  return out;
}

Rubric make_rubric(std::mt19937_64& rng, std::string id, std::int64_t max) {
  Rubric r;
  r.id = std::move(id);
  r.text = fmt::format("The report addresses criterion {} with supporting detail.", r.id);
  if (chance(rng, 0.4)) {
    r.allowed_scores = {Rational(0), Rational(max, 2), Rational(max)};
  } else {
    r.allowed_scores = {Rational(0), Rational(max)};
  }
  return r;
}

std::string capitalize_some(std::mt19937_64& rng, std::string s) {
  if (chance(rng, 0.2) && !s.empty()) s[0] = static_cast<char>(s[0] - 'a' + 'A');
  else if (chance(rng, 0.05)) std::transform(s.begin(), s.end(), s.begin(), [](char c) { return c >= 'a' && c <= 'z' ? c - 32 : c; });
  return s;
}

// A cited form of a canonical https TSL carrying harmless noise.
std::string noisy(std::mt19937_64& rng, const std::string& tsl) {
  const std::string prefix = "https://";
  std::string rest = tsl.substr(prefix.size());
  std::size_t slash = rest.find('/');
  std::string host = rest.substr(0, slash);
  std::string path = slash == std::string::npos ? "" : rest.substr(slash);
  switch (uniform(rng, 0, 7)) {
    case 0: return tsl;
    case 1: return prefix + "www." + rest;
    case 2: {
      std::string up = host;
      std::transform(up.begin(), up.end(), up.begin(), [](char c) { return c >= 'a' && c <= 'z' ? c - 32 : c; });
      return "HTTPS://" + up + path;
    }
    case 3: return tsl + "/";
    case 4: return tsl + "?utm_source=feed&x=1";
    case 5: return tsl + "#section-2";
    case 6: return prefix + host + ":443" + path;
    default: return prefix + "WWW." + host + path + "/?ref=a#top";
  }
}

}  // namespace

MockBackend::Fixture VerdictTable::to_fixture() const {
  MockBackend::Fixture f;
  f.default_rubric = MockBackend::RubricDefault::kMax;
  for (const auto& [entry, scores] : rubric) {
    for (const auto& [id, nd] : scores) f.rubrics[entry][id] = Rational(nd.first, nd.second);
  }
  f.relevance = relevance;
  return f;
}

GrrCatalog make_grr_catalog() {
  GrrCatalog c;
  for (int i = 1; i <= 48; ++i) {
    std::int64_t max = i <= 25 ? 2 : 1;
    Rubric r;
    r.id = fmt::format("G{:02}", i);
    r.text = fmt::format("General report requirement number {}.", i);
    r.allowed_scores = {Rational(0), Rational(max)};
    c.rubrics.push_back(std::move(r));
  }
  return c;
}

BenchEntry make_entry(std::mt19937_64& rng, int index) {
  BenchEntry e;
  e.domain_code = uniform(rng, 0, 10);
  e.id = fmt::format("{:02}{:03}", e.domain_code, index);
  e.query = fmt::format("Write a report on synthetic topic {}.", index);

  const int n = uniform(rng, 8, 12);
  std::vector<std::int64_t> maxes(static_cast<std::size_t>(n), 1);
  for (int left = 30 - n; left > 0;) {
    auto& m = maxes[uniform<std::size_t>(rng, 0, maxes.size() - 1)];
    if (m < 6) {
      ++m;
      --left;
    }
  }
  for (int i = 0; i < n; ++i) e.qsrs.push_back(make_rubric(rng, fmt::format("Q{}", i + 1), maxes[static_cast<std::size_t>(i)]));

  const int s = uniform(rng, 1, 4);
  for (int i = 0; i < s; ++i) {
    std::string host = chance(rng, 0.3) ? fmt::format("data.src{}.gov", index * 10 + i) : fmt::format("src{}.org", index * 10 + i);
    e.tsls.push_back(fmt::format("https://{}/doc/{}", host, uniform(rng, 1, 99)));
  }

  std::set<std::string> used(kFiller.begin(), kFiller.end());
  e.faks = make_keywords(rng, kFakCount, used);
  e.fdks = make_keywords(rng, kFdkCount, used);
  return e;
}

ResponseBundle make_response(std::mt19937_64& rng, const BenchEntry& entry, const std::string& model_name) {
  ResponseBundle b;
  b.entry_id = entry.id;
  b.model_name = model_name;

  std::vector<std::string> sentences(static_cast<std::size_t>(uniform(rng, 10, 20)));
  for (auto& sentence : sentences) {
    int words = uniform(rng, 6, 12);
    for (int w = 0; w < words; ++w) {
      if (w > 0) sentence += ' ';
      sentence += kFiller[uniform<std::size_t>(rng, 0, kFiller.size() - 1)];
    }
  }
  auto insert = [&](const std::string& keyword, int count) {
    for (int c = 0; c < count; ++c) {
      auto& sentence = sentences[uniform<std::size_t>(rng, 0, sentences.size() - 1)];
      sentence += " " + capitalize_some(rng, keyword);
    }
  };
  for (const auto& k : entry.faks) insert(k, uniform(rng, 0, 6));
  for (const auto& k : entry.fdks) insert(k, chance(rng, 0.5) ? 0 : uniform(rng, 1, 4));

  for (std::size_t i = 0; i < sentences.size(); ++i) {
    std::string& s = sentences[i];
    s[0] = static_cast<char>(s[0] >= 'a' && s[0] <= 'z' ? s[0] - 32 : s[0]);
    if (chance(rng, 0.3)) s += fmt::format(" [{}]", uniform(rng, 1, 9));
    if (chance(rng, 0.1)) s += fmt::format(" see https://inline{}.example.net/p/{}", uniform(rng, 1, 5), i);
    s += '.';
    b.report += (i == 0 ? "" : (chance(rng, 0.2) ? "\n\n" : " ")) + s;
  }

  const int n_links = uniform(rng, 0, 8);
  for (int i = 0; i < n_links; ++i) {
    const auto& tsl = entry.tsls[uniform<std::size_t>(rng, 0, entry.tsls.size() - 1)];
    switch (uniform(rng, 0, 5)) {
      case 0:
      case 1: b.annotations.push_back(noisy(rng, tsl)); break;
      case 2: {
        std::string rest = tsl.substr(8);
        b.annotations.push_back("https://" + rest.substr(0, rest.find('/')) + fmt::format("/other/{}", uniform(rng, 1, 9)));
        break;
      }
      case 3: b.annotations.push_back(fmt::format("https://unrelated{}.net/page{}", uniform(rng, 1, 20), i)); break;
      case 4:
        if (!b.annotations.empty()) b.annotations.push_back(b.annotations[uniform<std::size_t>(rng, 0, b.annotations.size() - 1)]);
        break;
      default:
        if (chance(rng, 0.3)) b.annotations.emplace_back("not a url");
        break;
    }
  }

  b.token_input = uniform<std::int64_t>(rng, 100, 5000);
  b.token_total = b.token_input + (chance(rng, 0.05) ? 0 : uniform<std::int64_t>(rng, 500, 40000));
  if (chance(rng, 0.7)) {
    b.trace = Trace{uniform<std::int64_t>(rng, 0, 20), uniform<std::int64_t>(rng, 0, 30), uniform<std::int64_t>(rng, 0, 30)};
  }
  return b;
}

void draw_verdicts(std::mt19937_64& rng, const BenchEntry& entry, const GrrCatalog& grrs, VerdictTable& table) {
  auto pick = [&](const Rubric& r) {
    const Rational& v = r.allowed_scores[uniform<std::size_t>(rng, 0, r.allowed_scores.size() - 1)];
    table.rubric[entry.id][r.id] = {v.num(), v.den()};
  };
  for (const auto& r : entry.qsrs) pick(r);
  for (const auto& r : grrs.rubrics) pick(r);
  for (const auto& k : entry.faks) table.relevance[entry.id][k] = uniform(rng, 1, 5);
  for (const auto& k : entry.fdks) table.relevance[entry.id][k] = uniform(rng, 1, 5);
}

SyntheticBench make_bench(std::uint64_t seed, std::size_t n_entries, const std::string& model_name) {
  std::mt19937_64 rng(seed);
  SyntheticBench bench;
  bench.grrs = make_grr_catalog();
  for (std::size_t i = 0; i < n_entries; ++i) {
    bench.entries.push_back(make_entry(rng, static_cast<int>(i + 1)));
    bench.responses.push_back(make_response(rng, bench.entries.back(), model_name));
    draw_verdicts(rng, bench.entries.back(), bench.grrs, bench.verdicts);
  }
  return bench;
}

void write_bench(const SyntheticBench& bench, const std::filesystem::path& dir) {
  std::filesystem::create_directories(dir);
  {
    std::ofstream out(dir / "entries.jsonl");
    for (const auto& e : bench.entries) out << dump_line(entry_to_json(e)) << '\n';
  }
  {
    std::ofstream out(dir / "grr.json");
    out << grr_catalog_to_json(bench.grrs).dump(2) << '\n';
  }
  {
    std::ofstream out(dir / "responses.jsonl");
    for (const auto& r : bench.responses) out << dump_line(response_to_json(r)) << '\n';
  }
  {
    nlohmann::json rubrics = nlohmann::json::object();
    for (const auto& [entry, scores] : bench.verdicts.rubric) {
      for (const auto& [id, nd] : scores) rubrics[entry][id] = rational_to_json(Rational(nd.first, nd.second));
    }
    nlohmann::json fixture = {{"default_rubric", "max"}, {"default_relevance", 5}, {"rubrics", rubrics},
                              {"relevance", bench.verdicts.relevance}};
    std::ofstream out(dir / "fixture.json");
    out << fixture.dump(2) << '\n';
  }
}

void append_occurrences(ResponseBundle& bundle, const std::string& word, int count) {
  for (int i = 0; i < count; ++i) bundle.report += " " + word;
}

}  // namespace rbench::testkit
