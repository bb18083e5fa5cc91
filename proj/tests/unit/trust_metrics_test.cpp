#include <gtest/gtest.h>

#include <algorithm>
#include <random>

#include "oracle.hpp"
#include "rbench/errors.hpp"
#include "rbench/trust_metrics.hpp"

using namespace rbench;

TEST(NormalizeUrl, DropsQueryAndFragment) {
  EXPECT_EQ(normalize_url("https://example.com/page?utm=1#sec"), "https://example.com/page");
}

TEST(NormalizeUrl, AppliesEveryRule) {
  EXPECT_EQ(normalize_url("HTTPS://WWW.Example.COM:443/Page/"), "https://example.com/Page");
}

TEST(NormalizeUrl, RootPathKeepsItsSlash) {
  EXPECT_EQ(normalize_url("https://Example.com"), "https://example.com/");
  EXPECT_EQ(normalize_url("https://example.com/?q=1"), "https://example.com/");
  EXPECT_EQ(normalize_url("https://example.com//"), "https://example.com/");
}

TEST(NormalizeUrl, KeepsPathCaseAndNonDefaultPorts) {
  EXPECT_EQ(normalize_url("http://Example.com:8080/A/b"), "http://example.com:8080/A/b");
  EXPECT_EQ(normalize_url("http://example.com:443/x"), "http://example.com:443/x");
  EXPECT_EQ(normalize_url("http://example.com:80/x"), "http://example.com/x");
}

TEST(NormalizeUrl, RejectsUnparseable) {
  for (const char* bad : {"ftp:", "", "not a url", "example.com/page", "https://", "https:///path", "http://exa mple.com",
                          "https://example.com:99999/", "https://example.com:abc/"}) {
    EXPECT_THROW(normalize_url(bad), UnparseableUrl) << bad;
  }
}

TEST(NormalizeUrl, IsIdempotentOnRandomInputs) {
  std::mt19937_64 rng(3);
  const std::vector<std::string> parts = {"HTTP://", "https://", "www.", "WWW.", "Example.org", "sub.site.net", ":443",
                                          ":80",     ":8443",    "/a",   "/B/",  "//",          "?q=1",         "#x",
                                          "/c.html", "/"};
  for (int i = 0; i < 2000; ++i) {
    std::string u = parts[rng() % 2];
    if (rng() % 2) u += parts[2 + rng() % 2];
    u += parts[4 + rng() % 2];
    if (rng() % 3 == 0) u += parts[6 + rng() % 3];
    for (int k = 0, n = static_cast<int>(rng() % 4); k < n; ++k) u += parts[9 + rng() % 7];
    std::string once = normalize_url(u);
    EXPECT_EQ(normalize_url(once), once) << u;
    EXPECT_EQ(once, testkit::oracle_canonical_url(u)) << u;
  }
}

TEST(Hostname, ExactHostOnly) {
  EXPECT_EQ(hostname_of("https://example.com/page"), "example.com");
  EXPECT_EQ(hostname_of("https://sub.example.com/x"), "sub.example.com");
  EXPECT_EQ(hostname_of("https://example.com"), "example.com");
  EXPECT_EQ(hostname_of("http://example.com:8080/x"), "example.com");
}

TEST(ComputeTrust, NoAnnotationsGivesUnitBoost) {
  std::vector<std::string> tsls = {"https://a.org/x"};
  TrustResult t = compute_trust(tsls, {}, EvalWeights{});
  EXPECT_EQ(t.rate_full_hit, 0.0);
  EXPECT_EQ(t.rate_host_hit, 0.0);
  EXPECT_EQ(t.boost, 1.0);
}

TEST(ComputeTrust, AllTslsCitedExactly) {
  std::vector<std::string> tsls = {"https://a.org/x", "https://b.org/y"};
  TrustResult t = compute_trust(tsls, tsls, EvalWeights{});
  EXPECT_NEAR(t.boost, 1.14, 1e-12);
  EXPECT_EQ(t.match_full, 2u);
  EXPECT_EQ(t.match_host_only, 0u);
}

TEST(ComputeTrust, TwoOfFourExactOneHostOnly) {
  std::vector<std::string> tsls = {"https://a.org/1", "https://b.org/2", "https://c.org/3", "https://d.org/4"};
  std::vector<std::string> ann = {"https://a.org/1", "https://b.org/2", "https://c.org/other", "https://x.org/1",
                                  "https://y.org/2"};
  TrustResult t = compute_trust(tsls, ann, EvalWeights{});
  EXPECT_EQ(t.match_full, 2u);
  EXPECT_EQ(t.match_host_only, 1u);
  EXPECT_NEAR(t.rate_host_hit, 1.0 / 6.0, 1e-15);
  EXPECT_NEAR(t.boost, 1.08, 1e-12);

  TrustResult body = compute_trust(tsls, ann, EvalWeights{}, TrustFormula::kBody);
  EXPECT_EQ(body.match_host_only, 3u);
  EXPECT_NEAR(body.boost, 1.0 + 0.2 * (0.7 * 0.5 + 0.3 * 0.5), 1e-12);
}

TEST(ComputeTrust, EmptyTslsThrows) {
  EXPECT_THROW(compute_trust({}, {}, EvalWeights{}), EmptyTsls);
}

TEST(ComputeTrust, BoundedPermutationInvariantAndDistinctCounting) {
  std::mt19937_64 rng(5);
  const EvalWeights w;
  for (int trial = 0; trial < 500; ++trial) {
    std::vector<std::string> tsls, ann;
    int s = 1 + static_cast<int>(rng() % 5);
    for (int i = 0; i < s; ++i) tsls.push_back("https://h" + std::to_string(i) + ".org/p" + std::to_string(rng() % 3));
    std::sort(tsls.begin(), tsls.end());
    tsls.erase(std::unique(tsls.begin(), tsls.end()), tsls.end());
    int t = static_cast<int>(rng() % 9);
    for (int i = 0; i < t; ++i) ann.push_back("https://h" + std::to_string(rng() % 7) + ".org/p" + std::to_string(rng() % 4));
    std::sort(ann.begin(), ann.end());
    ann.erase(std::unique(ann.begin(), ann.end()), ann.end());

    TrustResult base = compute_trust(tsls, ann, w);
    EXPECT_GE(base.boost, 1.0);
    EXPECT_LE(base.boost, 1.0 + w.eta);
    EXPECT_LE(base.rate_full_hit, 1.0);

    auto shuffled_tsls = tsls;
    auto shuffled_ann = ann;
    std::shuffle(shuffled_tsls.begin(), shuffled_tsls.end(), rng);
    std::shuffle(shuffled_ann.begin(), shuffled_ann.end(), rng);
    EXPECT_EQ(compute_trust(shuffled_tsls, shuffled_ann, w), base);

    auto with_miss = ann;
    with_miss.push_back("https://nowhere.example/z");
    TrustResult missed = compute_trust(tsls, with_miss, w);
    EXPECT_EQ(missed.rate_full_hit, base.rate_full_hit);
    if (base.match_host_only > 0) EXPECT_LT(missed.rate_host_hit, base.rate_host_hit);
  }
}

TEST(ComputeTrust, MaximumOnlyForFullRecallWithoutHostHits) {
  std::vector<std::string> tsls = {"https://a.org/x"};
  std::vector<std::string> ann = {"https://a.org/x", "https://a.org/y"};
  TrustResult t = compute_trust(tsls, ann, EvalWeights{});
  EXPECT_GT(t.boost, 1.14);
  EXPECT_LE(t.boost, 1.2);
}

TEST(UrlSpans, FindsSchemesAndTrimsPunctuation) {
  std::string text = "see https://a.org/x, and (http://b.org/y). Also ftp://c.net/z!";
  auto spans = find_url_spans(text);
  ASSERT_EQ(spans.size(), 3u);
  EXPECT_EQ(text.substr(spans[0].first, spans[0].second - spans[0].first), "https://a.org/x");
  EXPECT_EQ(text.substr(spans[1].first, spans[1].second - spans[1].first), "http://b.org/y");
  EXPECT_EQ(text.substr(spans[2].first, spans[2].second - spans[2].first), "ftp://c.net/z");
}

TEST(TrustFormulaNames, RoundTrip) {
  EXPECT_EQ(parse_trust_formula(to_string(TrustFormula::kBody)), TrustFormula::kBody);
  EXPECT_EQ(parse_trust_formula("algorithm"), TrustFormula::kAlgorithm);
  EXPECT_THROW(parse_trust_formula("other"), UsageError);
}
