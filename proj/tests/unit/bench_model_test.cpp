#include <gtest/gtest.h>

#include "rbench/bench_model.hpp"
#include "synthetic.hpp"

using namespace rbench;

namespace {

Rubric binary(std::string id, std::int64_t max) { return {std::move(id), "criterion", {Rational(0), Rational(max)}}; }

// 8 QSRs summing to 30, 5 FAKs, 5 FDKs, 2 TSLs.
BenchEntry valid_entry() {
  BenchEntry e;
  e.id = "07001";
  e.domain_code = 7;
  e.query = "Write a report on QUIC.";
  for (int i = 0; i < 6; ++i) e.qsrs.push_back(binary("Q" + std::to_string(i + 1), 4));
  e.qsrs.push_back({"Q7", "partial credit", {Rational(0), Rational(1), Rational(2)}});
  e.qsrs.push_back(binary("Q8", 4));
  e.tsls = {"https://datatracker.ietf.org/doc/html/rfc9000", "https://chromium.org/quic"};
  e.faks = {"QUIC", "RFC 9000", "handshake", "HTTP/3", "congestion control"};
  e.fdks = {"blockchain", "5G", "satellite", "quantum", "SD-WAN"};
  return e;
}

}  // namespace

TEST(ValidateEntry, ValidEntryHasNoViolations) { EXPECT_TRUE(validate_entry(valid_entry()).empty()); }

TEST(ValidateEntry, SevenQsrsIsQsrCount) {
  BenchEntry e = valid_entry();
  e.qsrs.pop_back();
  e.qsrs[0] = binary("Q1", 8);
  auto report = validate_entry(e);
  ASSERT_EQ(report.size(), 1u);
  EXPECT_EQ(report[0].code, ViolationCode::kQsrCount);
}

TEST(ValidateEntry, TotalOf29IsQsrTotal) {
  BenchEntry e = valid_entry();
  e.qsrs[0] = binary("Q1", 3);
  auto report = validate_entry(e);
  ASSERT_EQ(report.size(), 1u);
  EXPECT_EQ(report[0].code, ViolationCode::kQsrTotal);
}

TEST(ValidateEntry, KeywordAndLinkProblems) {
  BenchEntry e = valid_entry();
  e.faks.pop_back();
  e.fdks[0] = "  ";
  e.tsls = {};
  auto report = validate_entry(e);
  EXPECT_TRUE(has_code(report, ViolationCode::kFakCount));
  EXPECT_TRUE(has_code(report, ViolationCode::kKeywordEmpty));
  EXPECT_TRUE(has_code(report, ViolationCode::kTslEmpty));
}

TEST(ValidateEntry, TslMustBeCanonicalAndDistinct) {
  BenchEntry e = valid_entry();
  e.tsls = {"https://www.chromium.org/quic/", "https://chromium.org/quic", "https://chromium.org/quic"};
  auto report = validate_entry(e);
  EXPECT_TRUE(has_code(report, ViolationCode::kTslNotCanonical));
  EXPECT_TRUE(has_code(report, ViolationCode::kTslDuplicate));
}

TEST(ValidateEntry, DomainIdAndLadderChecks) {
  BenchEntry e = valid_entry();
  e.domain_code = 11;
  e.id = "";
  e.qsrs[0].allowed_scores = {Rational(1), Rational(4)};
  e.qsrs[1].id = "Q3";
  auto report = validate_entry(e);
  EXPECT_TRUE(has_code(report, ViolationCode::kDomainCode));
  EXPECT_TRUE(has_code(report, ViolationCode::kEntryId));
  EXPECT_TRUE(has_code(report, ViolationCode::kRubricScores));
  EXPECT_TRUE(has_code(report, ViolationCode::kRubricId));
}

TEST(ValidateRubric, LadderShape) {
  EXPECT_TRUE(validate_rubric(binary("a", 2)).empty());
  EXPECT_TRUE(validate_rubric({"a", "t", {Rational(0), Rational(3, 2), Rational(3)}}).empty());
  EXPECT_FALSE(validate_rubric({"a", "t", {Rational(0)}}).empty());
  EXPECT_FALSE(validate_rubric({"a", "t", {Rational(0), Rational(2), Rational(1)}}).empty());
  EXPECT_FALSE(validate_rubric({"a", "t", {Rational(0), Rational(1), Rational(2), Rational(3)}}).empty());
}

TEST(ValidateGrr, CanonicalCatalogIsValid) {
  EXPECT_TRUE(validate_grr_catalog(testkit::make_grr_catalog()).empty());
}

TEST(ValidateGrr, CountTotalAndBinary) {
  GrrCatalog c = testkit::make_grr_catalog();
  c.rubrics.pop_back();
  EXPECT_TRUE(has_code(validate_grr_catalog(c), ViolationCode::kGrrCount));

  c = testkit::make_grr_catalog();
  c.rubrics[0] = binary("G01", 1);
  auto report = validate_grr_catalog(c);
  ASSERT_EQ(report.size(), 1u);
  EXPECT_EQ(report[0].code, ViolationCode::kGrrTotal);

  c = testkit::make_grr_catalog();
  c.rubrics[0].allowed_scores = {Rational(0), Rational(1), Rational(2)};
  EXPECT_TRUE(has_code(validate_grr_catalog(c), ViolationCode::kGrrNotBinary));
}

TEST(ValidateEntry, SyntheticEntriesAreValid) {
  std::mt19937_64 rng(11);
  for (int i = 0; i < 200; ++i) {
    auto report = validate_entry(testkit::make_entry(rng, i + 1));
    EXPECT_TRUE(report.empty()) << (report.empty() ? "" : report[0].message);
  }
}

TEST(DomainName, KnownCodes) {
  EXPECT_EQ(domain_name(0).value(), "Unclassified");
  EXPECT_TRUE(domain_name(10).has_value());
  EXPECT_FALSE(domain_name(11).has_value());
  EXPECT_FALSE(domain_name(-1).has_value());
}

TEST(ViolationCodes, StableNames) {
  EXPECT_EQ(to_string(ViolationCode::kQsrCount), "QSR_COUNT");
  EXPECT_EQ(to_string(ViolationCode::kGrrTotal), "GRR_TOTAL");
}
