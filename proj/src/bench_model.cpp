#include "rbench/bench_model.hpp"

#include <algorithm>
#include <array>
#include <set>

#include <fmt/format.h>

#include "rbench/errors.hpp"
#include "rbench/trust_metrics.hpp"

namespace rbench {
namespace {

constexpr std::array<std::string_view, 11> kDomainNames = {
    "Unclassified",
    "Academia & Research",
    "News & Current Affairs",
    "Sports & Competitions",
    "Commonsense & Education",
    "Law & Politics",
    "Business & Finance",
    "Technology Intelligence",
    "Environment & Sustainability",
    "History & Social Sciences",
    "Health & Medicine",
};

void check_rubric_ids(const std::vector<Rubric>& rubrics, std::string_view kind, ValidationReport& out) {
  std::set<std::string_view> seen;
  for (const auto& r : rubrics) {
    if (r.id.empty()) {
      out.push_back({ViolationCode::kRubricId, fmt::format("{} rubric with empty id", kind)});
    } else if (!seen.insert(r.id).second) {
      out.push_back({ViolationCode::kRubricId, fmt::format("duplicate {} rubric id '{}'", kind, r.id)});
    }
  }
}

bool is_blank(std::string_view s) {
  return std::all_of(s.begin(), s.end(), [](unsigned char c) { return c == ' ' || c == '\t' || c == '\n' || c == '\r'; });
}

}  // namespace

bool Rubric::allows(const Rational& score) const {
  return std::find(allowed_scores.begin(), allowed_scores.end(), score) != allowed_scores.end();
}

std::string_view to_string(ViolationCode code) {
  switch (code) {
    case ViolationCode::kRubricScores: return "RUBRIC_SCORES";
    case ViolationCode::kRubricId: return "RUBRIC_ID";
    case ViolationCode::kQsrCount: return "QSR_COUNT";
    case ViolationCode::kQsrTotal: return "QSR_TOTAL";
    case ViolationCode::kFakCount: return "FAK_COUNT";
    case ViolationCode::kFdkCount: return "FDK_COUNT";
    case ViolationCode::kKeywordEmpty: return "KEYWORD_EMPTY";
    case ViolationCode::kTslEmpty: return "TSL_EMPTY";
    case ViolationCode::kTslNotCanonical: return "TSL_NOT_CANONICAL";
    case ViolationCode::kTslDuplicate: return "TSL_DUPLICATE";
    case ViolationCode::kDomainCode: return "DOMAIN_CODE";
    case ViolationCode::kEntryId: return "ENTRY_ID";
    case ViolationCode::kGrrCount: return "GRR_COUNT";
    case ViolationCode::kGrrTotal: return "GRR_TOTAL";
    case ViolationCode::kGrrNotBinary: return "GRR_NOT_BINARY";
  }
  return "UNKNOWN";
}

ValidationReport validate_rubric(const Rubric& rubric) {
  ValidationReport out;
  const auto& s = rubric.allowed_scores;
  if (s.size() != 2 && s.size() != 3) {
    out.push_back({ViolationCode::kRubricScores,
                   fmt::format("rubric '{}' has {} allowed scores; expected 2 or 3", rubric.id, s.size())});
  }
  if (s.empty()) return out;
  if (s.front() != Rational{}) {
    out.push_back({ViolationCode::kRubricScores, fmt::format("rubric '{}' ladder does not start at 0", rubric.id)});
  }
  if (!(s.back() > Rational{})) {
    out.push_back({ViolationCode::kRubricScores, fmt::format("rubric '{}' max score is not positive", rubric.id)});
  }
  if (!std::is_sorted(s.begin(), s.end()) || std::adjacent_find(s.begin(), s.end()) != s.end()) {
    out.push_back({ViolationCode::kRubricScores, fmt::format("rubric '{}' ladder is not strictly ascending", rubric.id)});
  }
  return out;
}

ValidationReport validate_entry(const BenchEntry& entry) {
  ValidationReport out;
  if (entry.id.empty()) out.push_back({ViolationCode::kEntryId, "entry id is empty"});

  if (entry.domain_code < kMinDomainCode || entry.domain_code > kMaxDomainCode) {
    out.push_back({ViolationCode::kDomainCode, fmt::format("domain_code {} outside 0..10", entry.domain_code)});
  }

  if (entry.qsrs.size() < kMinQsrCount) {
    out.push_back({ViolationCode::kQsrCount, fmt::format("{} QSRs; at least {} required", entry.qsrs.size(), kMinQsrCount)});
  }
  Rational total;
  for (const auto& r : entry.qsrs) {
    auto rv = validate_rubric(r);
    out.insert(out.end(), rv.begin(), rv.end());
    total += r.max_score();
  }
  if (total != Rational(kQsrTotalPoints)) {
    out.push_back({ViolationCode::kQsrTotal, fmt::format("QSR max scores sum to {}; expected {}", total.to_string(), kQsrTotalPoints)});
  }
  check_rubric_ids(entry.qsrs, "QSR", out);

  if (entry.faks.size() != kFakCount) {
    out.push_back({ViolationCode::kFakCount, fmt::format("{} FAKs; exactly {} required", entry.faks.size(), kFakCount)});
  }
  if (entry.fdks.size() != kFdkCount) {
    out.push_back({ViolationCode::kFdkCount, fmt::format("{} FDKs; exactly {} required", entry.fdks.size(), kFdkCount)});
  }
  for (const auto* list : {&entry.faks, &entry.fdks}) {
    for (const auto& k : *list) {
      if (is_blank(k)) out.push_back({ViolationCode::kKeywordEmpty, "blank keyword"});
    }
  }

  if (entry.tsls.empty()) out.push_back({ViolationCode::kTslEmpty, "no trustworthy-source links"});
  std::set<std::string_view> seen;
  for (const auto& link : entry.tsls) {
    try {
      if (normalize_url(link) != link) {
        out.push_back({ViolationCode::kTslNotCanonical, fmt::format("TSL '{}' is not canonical (expected '{}')", link, normalize_url(link))});
      }
    } catch (const UnparseableUrl&) {
      out.push_back({ViolationCode::kTslNotCanonical, fmt::format("TSL '{}' is not a URL", link)});
    }
    if (!seen.insert(link).second) {
      out.push_back({ViolationCode::kTslDuplicate, fmt::format("duplicate TSL '{}'", link)});
    }
  }
  return out;
}

ValidationReport validate_grr_catalog(const GrrCatalog& catalog) {
  ValidationReport out;
  if (catalog.rubrics.size() != kGrrCount) {
    out.push_back({ViolationCode::kGrrCount, fmt::format("{} GRRs; exactly {} required", catalog.rubrics.size(), kGrrCount)});
  }
  Rational total;
  for (const auto& r : catalog.rubrics) {
    auto rv = validate_rubric(r);
    out.insert(out.end(), rv.begin(), rv.end());
    if (!r.is_binary()) {
      out.push_back({ViolationCode::kGrrNotBinary, fmt::format("GRR '{}' is not binary", r.id)});
    }
    total += r.max_score();
  }
  if (total != Rational(kGrrTotalPoints)) {
    out.push_back({ViolationCode::kGrrTotal, fmt::format("GRR max scores sum to {}; expected {}", total.to_string(), kGrrTotalPoints)});
  }
  check_rubric_ids(catalog.rubrics, "GRR", out);
  return out;
}

bool has_code(const ValidationReport& report, ViolationCode code) {
  return std::any_of(report.begin(), report.end(), [code](const Violation& v) { return v.code == code; });
}

std::optional<std::string_view> domain_name(int code) {
  if (code < kMinDomainCode || code > kMaxDomainCode) return std::nullopt;
  return kDomainNames[static_cast<std::size_t>(code)];
}

}  // namespace rbench
