#include <gtest/gtest.h>

#include <fstream>
#include <sstream>

#include "rbench/errors.hpp"
#include "rbench/run.hpp"
#include "synthetic.hpp"
#include "test_helpers.hpp"

using namespace rbench;

namespace {

const std::filesystem::path kSample = RBENCH_SAMPLE_DIR;

std::string slurp(const std::filesystem::path& p) {
  std::ifstream in(p, std::ios::binary);
  std::stringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

struct Synthetic {
  LoadedBench bench;
  std::vector<ResponseBundle> responses;
  std::shared_ptr<MockBackend> backend;
};

Synthetic synthetic(std::size_t n, std::uint64_t seed = 5) {
  auto b = testkit::make_bench(seed, n, "model-s");
  Synthetic s;
  s.bench.entries = b.entries;
  s.bench.grrs = b.grrs;
  s.responses = b.responses;
  s.backend = std::make_shared<MockBackend>(b.verdicts.to_fixture());
  return s;
}

}  // namespace

TEST(Run, SampleAllScored) {
  LoadedBench bench = load_entries(kSample / "entries.jsonl", kSample / "grr.json");
  auto responses = load_responses(kSample / "responses.jsonl", "sample-model");
  testkit::TempDir dir("run-sample");
  RunOptions o;
  o.out_dir = dir.path();
  o.model_name = "sample-model";
  RunSummary s = run_evaluate(bench, responses, EvalConfig{}, std::make_shared<MockBackend>(MockBackend::Fixture{}), o);
  EXPECT_EQ(s.scores.size(), 3u);
  EXPECT_TRUE(s.missing.empty());
  EXPECT_TRUE(s.failed.empty());
  EXPECT_FALSE(s.interrupted);
  auto manifest = nlohmann::json::parse(slurp(dir / kManifestFile));
  EXPECT_EQ(manifest["status"], "complete");
  EXPECT_EQ(manifest["run_id"], s.run_id);
  EXPECT_EQ(manifest["scored"], 3);
}

TEST(Run, MissingResponseIsReported) {
  LoadedBench bench = load_entries(kSample / "entries.jsonl", kSample / "grr.json");
  auto responses = load_responses(kSample / "responses.jsonl", "m");
  responses.erase(responses.begin() + 1);
  testkit::TempDir dir("run-missing");
  RunOptions o;
  o.out_dir = dir.path();
  o.model_name = "m";
  RunSummary s = run_evaluate(bench, responses, EvalConfig{}, std::make_shared<MockBackend>(MockBackend::Fixture{}), o);
  EXPECT_EQ(s.scores.size(), 2u);
  EXPECT_EQ(s.missing, (std::vector<std::string>{"03002"}));
  auto manifest = nlohmann::json::parse(slurp(dir / kManifestFile));
  EXPECT_EQ(manifest["missing"], nlohmann::json::array({"03002"}));
}

TEST(Run, DeterministicAcrossWorkerCounts) {
  Synthetic s = synthetic(40);
  testkit::TempDir a("run-a"), b("run-b");
  RunOptions o;
  o.model_name = "model-s";
  o.out_dir = a.path();
  o.workers = 1;
  run_evaluate(s.bench, s.responses, EvalConfig{}, s.backend, o);
  o.out_dir = b.path();
  o.workers = 8;
  run_evaluate(s.bench, s.responses, EvalConfig{}, s.backend, o);
  EXPECT_EQ(slurp(a / kScoresFile), slurp(b / kScoresFile));
  EXPECT_EQ(slurp(a / kTranscriptsFile).size() > 0, true);
}

TEST(Run, EveryRecordCarriesRunId) {
  Synthetic s = synthetic(6);
  testkit::TempDir dir("run-id");
  RunOptions o;
  o.model_name = "model-s";
  o.out_dir = dir.path();
  RunSummary sum = run_evaluate(s.bench, s.responses, EvalConfig{}, s.backend, o);
  ScoreFile f = load_scores(dir / kScoresFile);
  EXPECT_EQ(f.run_ids, (std::vector<std::string>{sum.run_id}));
  std::ifstream in(dir / kTranscriptsFile);
  std::string line;
  int n = 0;
  while (std::getline(in, line)) {
    EXPECT_EQ(nlohmann::json::parse(line)["run_id"], sum.run_id);
    ++n;
  }
  EXPECT_GT(n, 0);
}

TEST(Run, ResumeSkipsScoredEntries) {
  Synthetic s = synthetic(30);
  testkit::TempDir full("resume-full"), part("resume-part");
  RunOptions o;
  o.model_name = "model-s";
  o.out_dir = full.path();
  run_evaluate(s.bench, s.responses, EvalConfig{}, s.backend, o);

  auto first = std::make_shared<testkit::InstrumentedBackend>(s.backend);
  o.out_dir = part.path();
  o.stop_after = 12;
  RunSummary cut = run_evaluate(s.bench, s.responses, EvalConfig{}, first, o);
  EXPECT_TRUE(cut.interrupted);
  EXPECT_EQ(cut.scores.size(), 12u);
  EXPECT_EQ(nlohmann::json::parse(slurp(part / kManifestFile))["status"], "interrupted");

  auto second = std::make_shared<testkit::InstrumentedBackend>(s.backend);
  o.stop_after.reset();
  o.resume = true;
  RunSummary rest = run_evaluate(s.bench, s.responses, EvalConfig{}, second, o);
  EXPECT_FALSE(rest.interrupted);
  EXPECT_EQ(rest.reused, 12u);
  EXPECT_EQ(rest.newly_scored, 18u);
  EXPECT_EQ(slurp(part / kScoresFile), slurp(full / kScoresFile));

  // The second session judged only the remaining entries.
  auto third = std::make_shared<testkit::InstrumentedBackend>(s.backend);
  testkit::TempDir fresh("resume-fresh");
  o.out_dir = fresh.path();
  o.resume = false;
  run_evaluate(s.bench, s.responses, EvalConfig{}, third, o);
  EXPECT_EQ(first->calls() + second->calls(), third->calls());
}

TEST(Run, ResumeRejectsDifferentRun) {
  Synthetic s = synthetic(4);
  testkit::TempDir dir("resume-mismatch");
  RunOptions o;
  o.model_name = "model-s";
  o.out_dir = dir.path();
  run_evaluate(s.bench, s.responses, EvalConfig{}, s.backend, o);
  EvalConfig other;
  other.weights.eta = 0.1;
  o.resume = true;
  EXPECT_THROW(run_evaluate(s.bench, s.responses, other, s.backend, o), UsageError);
}

TEST(Run, JudgerFailureIsPerEntry) {
  Synthetic s = synthetic(5);
  const std::string bad = s.bench.entries[2].id;
  auto backend = std::make_shared<testkit::ScriptedBackend>([&](const JudgeRequest& r) {
    if (r.entry_id == bad) throw TransportError("down");
    return s.backend->complete(r);
  });
  testkit::TempDir dir("run-fail");
  RunOptions o;
  o.model_name = "model-s";
  o.out_dir = dir.path();
  EvalConfig cfg;
  cfg.judger.retries = 0;
  RunSummary sum = run_evaluate(s.bench, s.responses, cfg, backend, o);
  EXPECT_EQ(sum.scores.size(), 4u);
  ASSERT_EQ(sum.failed.size(), 1u);
  EXPECT_EQ(sum.failed[0].entry_id, bad);
  EXPECT_EQ(sum.failed[0].error_kind, "JudgerUnavailable");
}

TEST(Run, DomainFilter) {
  Synthetic s = synthetic(30);
  testkit::TempDir dir("run-domain");
  RunOptions o;
  o.model_name = "model-s";
  o.out_dir = dir.path();
  o.domain_filter = s.bench.entries[0].domain_code;
  RunSummary sum = run_evaluate(s.bench, s.responses, EvalConfig{}, s.backend, o);
  ASSERT_FALSE(sum.scores.empty());
  for (const auto& sc : sum.scores) EXPECT_EQ(sc.domain_code, *o.domain_filter);
}
