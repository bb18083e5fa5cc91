#pragma once

#include <optional>
#include <string>
#include <string_view>
#include <vector>

#include "rbench/rational.hpp"

namespace rbench {

inline constexpr std::int64_t kQsrTotalPoints = 30;
inline constexpr std::size_t kMinQsrCount = 8;
inline constexpr std::size_t kGrrCount = 48;
inline constexpr std::int64_t kGrrTotalPoints = 73;
inline constexpr std::size_t kFakCount = 5;
inline constexpr std::size_t kFdkCount = 5;
inline constexpr int kMinDomainCode = 0;
inline constexpr int kMaxDomainCode = 10;

/// A judging criterion with its discrete score ladder.
///
/// allowed_scores is ascending, starts at 0 and ends at the maximum. Binary
/// rubrics have two rungs, ternary rubrics carry their "Partial" value as the
/// middle rung.
struct Rubric {
  std::string id;
  std::string text;
  std::vector<Rational> allowed_scores;

  /// Last rung, or 0 for an empty ladder.
  Rational max_score() const { return allowed_scores.empty() ? Rational{} : allowed_scores.back(); }
  bool allows(const Rational& score) const;
  bool is_binary() const { return allowed_scores.size() == 2; }
};

struct BenchEntry {
  std::string id;
  int domain_code = 0;
  std::string query;
  std::vector<Rubric> qsrs;
  std::vector<std::string> tsls;
  std::vector<std::string> faks;
  std::vector<std::string> fdks;
};

struct GrrCatalog {
  std::vector<Rubric> rubrics;
};

/// Machine-readable codes for every checked invariant.
enum class ViolationCode {
  kRubricScores,   // ladder malformed (order, zero, length, max)
  kRubricId,       // empty or duplicate rubric id
  kQsrCount,
  kQsrTotal,
  kFakCount,
  kFdkCount,
  kKeywordEmpty,
  kTslEmpty,
  kTslNotCanonical,
  kTslDuplicate,
  kDomainCode,
  kEntryId,
  kGrrCount,
  kGrrTotal,
  kGrrNotBinary,
};

std::string_view to_string(ViolationCode code);

struct Violation {
  ViolationCode code;
  std::string message;

  friend bool operator==(const Violation&, const Violation&) = default;
};

using ValidationReport = std::vector<Violation>;

/// Every violated entry invariant; empty when the entry is valid.
ValidationReport validate_entry(const BenchEntry& entry);

/// Checks count = 48, total = 73 and that every rubric is binary.
ValidationReport validate_grr_catalog(const GrrCatalog& catalog);

/// Violations of a single rubric ladder. Used by both validators.
ValidationReport validate_rubric(const Rubric& rubric);

bool has_code(const ValidationReport& report, ViolationCode code);

/// Domain taxonomy name for codes 0..10, nullopt otherwise.
std::optional<std::string_view> domain_name(int code);

}  // namespace rbench
