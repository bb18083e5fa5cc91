#include "rbench/cli.hpp"

#include <algorithm>
#include <filesystem>
#include <fstream>
#include <optional>

#include <CLI11.hpp>
#include <fmt/format.h>
#include <fmt/ostream.h>

#include "rbench/aggregate.hpp"
#include "rbench/config.hpp"
#include "rbench/errors.hpp"
#include "rbench/io.hpp"
#include "rbench/run.hpp"
#include "rbench/semantic_metrics.hpp"

namespace rbench {
namespace {

namespace fs = std::filesystem;
using nlohmann::json;

// Options shared by the commands that need an evaluation configuration.
struct ConfigFlags {
  std::string config_path;
  std::string judger;
  std::string fixture;
  std::string trust_formula;

  void attach(CLI::App* cmd, bool with_judger) {
    cmd->add_option("--config", config_path, "JSON config file")->check(CLI::ExistingFile);
    if (with_judger) {
      cmd->add_option("--judger", judger, "Judger backend")->check(CLI::IsMember({"mock", "live"}));
      cmd->add_option("--fixture", fixture, "Score map for the mock judger")->check(CLI::ExistingFile);
    }
    cmd->add_option("--trust-formula", trust_formula, "Host-hit counting rule")
        ->check(CLI::IsMember({"algorithm", "body"}));
  }

  // defaults < config file < environment < flags
  EvalConfig resolve() const {
    EvalConfig c;
    if (!config_path.empty()) c = load_config(config_path, c);
    apply_environment(c);
    if (!judger.empty()) c.judger.backend = parse_backend_kind(judger);
    if (!trust_formula.empty()) c.trust_formula = parse_trust_formula(trust_formula);
    return c;
  }

  std::optional<fs::path> fixture_path() const {
    return fixture.empty() ? std::nullopt : std::optional<fs::path>(fixture);
  }
};

EvalConfig checked(EvalConfig c) {
  if (auto problems = config_problems(c); !problems.empty()) {
    throw UsageError(fmt::format("invalid configuration: {}", fmt::join(problems, "; ")));
  }
  return c;
}

std::string fmt_optional(const std::optional<double>& v) { return v ? fmt::format("{:.6f}", *v) : "-"; }

int cmd_validate(const std::string& entries, const std::string& grr, std::ostream& out) {
  LoadedBench bench = load_entries(entries, grr);
  fmt::print(out, "entries: {} valid, {} skipped\n", bench.entries.size(), bench.skipped.size());
  for (const auto& s : bench.skipped) {
    for (const auto& v : s.violations) {
      fmt::print(out, "  line {} entry '{}': {} {}\n", s.line, s.id, to_string(v.code), v.message);
    }
  }
  fmt::print(out, "grr catalog: {} rubrics, {}\n", bench.grrs.rubrics.size(),
             bench.grr_violations.empty() ? "valid" : "invalid");
  for (const auto& v : bench.grr_violations) fmt::print(out, "  {} {}\n", to_string(v.code), v.message);
  return bench.skipped.empty() && bench.grr_violations.empty() ? kExitOk : kExitFailure;
}

struct EvaluateFlags {
  std::string entries, grr, responses, model, out_dir;
  int workers = 4;
  bool resume = false;
  std::string transcripts = "on";
  std::optional<int> domain;
  ConfigFlags config;
};

int cmd_evaluate(const EvaluateFlags& f, std::ostream& out) {
  EvalConfig config = checked(f.config.resolve());
  LoadedBench bench = load_entries(f.entries, f.grr);
  if (!bench.grr_violations.empty()) {
    throw UsageError(fmt::format("GRR catalog {} is invalid: {} {}", f.grr, to_string(bench.grr_violations.front().code),
                                 bench.grr_violations.front().message));
  }
  std::vector<ResponseBundle> responses = load_responses(f.responses, f.model);

  RunOptions options;
  options.out_dir = f.out_dir;
  options.model_name = f.model;
  options.workers = f.workers;
  options.resume = f.resume;
  options.transcripts = f.transcripts == "on";
  options.domain_filter = f.domain;
  options.entries_digest = sha256_hex(sha256_file(f.entries) + sha256_file(f.grr));
  options.responses_digest = sha256_file(f.responses);

  RunSummary summary = run_evaluate(bench, responses, config, make_backend(config.judger, f.config.fixture_path()), options);
  fmt::print(out, "run {}: {} scored ({} new, {} resumed), {} missing, {} failed, {} invalid entries skipped\n",
             summary.run_id, summary.scores.size(), summary.newly_scored, summary.reused, summary.missing.size(),
             summary.failed.size(), bench.skipped.size());
  for (const auto& e : summary.failed) fmt::print(out, "  failed '{}': {} {}\n", e.entry_id, e.error_kind, e.detail);
  fmt::print(out, "wrote {}\n", (fs::path(f.out_dir) / kScoresFile).string());
  return summary.failed.empty() && !summary.interrupted ? kExitOk : kExitPartial;
}

struct LoadedScores {
  std::vector<EntryScore> scores;
  std::vector<std::string> run_ids;
};

LoadedScores read_score_files(const std::vector<std::string>& paths) {
  LoadedScores all;
  for (const auto& p : paths) {
    ScoreFile f = load_scores(p);
    for (auto& s : f.scores) all.scores.push_back(std::move(s));
    for (auto& id : f.run_ids) {
      if (std::find(all.run_ids.begin(), all.run_ids.end(), id) == all.run_ids.end()) all.run_ids.push_back(id);
    }
  }
  return all;
}

json aggregates_document(const std::vector<ModelAggregate>& aggregates, const std::vector<std::string>& run_ids) {
  json models = json::array();
  for (const auto& a : aggregates) models.push_back(aggregate_to_json(a));
  return {{"run_ids", run_ids}, {"models", models}};
}

void write_text(const fs::path& path, const std::string& text) {
  if (path.has_parent_path()) fs::create_directories(path.parent_path());
  write_file_atomic(path, text);
}

int cmd_aggregate(const std::vector<std::string>& score_paths, const std::string& out_path, std::ostream& out) {
  LoadedScores loaded = read_score_files(score_paths);
  std::vector<ModelAggregate> aggregates = aggregate_by_model(loaded.scores);
  for (const auto& a : aggregates) {
    const auto& m = a.means;
    fmt::print(out, "{}: n={} quality={:.4f} 1-drift={:.4f} boost={:.4f} integrated={:.4f} product_of_means={:.4f} "
                    "usage={:.0f} c/token={} incomplete={}\n",
               a.model_name, m.n_entries, m.mean_quality, m.mean_one_minus_drift, m.mean_boost, m.mean_integrated,
               m.product_of_means(), m.mean_usage_tokens, fmt_optional(m.mean_contribution_per_token), a.n_incomplete);
  }
  if (!out_path.empty()) {
    write_text(out_path, aggregates_document(aggregates, loaded.run_ids).dump(2) + '\n');
    fmt::print(out, "wrote {}\n", out_path);
  }
  return kExitOk;
}

struct LeaderboardFlags {
  std::vector<std::string> aggregates;
  std::vector<std::string> scores;
  std::string entries;
  std::string out_dir;
};

std::string runs_line(const std::vector<std::string>& run_ids) { return fmt::format("runs: {}\n", fmt::join(run_ids, ",")); }

int cmd_leaderboard(const LeaderboardFlags& f, std::ostream& out) {
  std::vector<ModelAggregate> aggregates;
  std::vector<std::string> run_ids;
  std::optional<DomainMatrix> matrix;
  if (!f.scores.empty()) {
    LoadedScores loaded = read_score_files(f.scores);
    aggregates = aggregate_by_model(loaded.scores);
    run_ids = loaded.run_ids;
    if (!f.entries.empty()) {
      std::vector<BenchEntry> entries;
      std::ifstream in(f.entries);
      if (!in) throw FileUnreadable(fmt::format("cannot read {}", f.entries));
      std::string line;
      while (std::getline(in, line)) {
        if (line.find_first_not_of(" \t\r") == std::string::npos) continue;
        try {
          entries.push_back(entry_from_json(json::parse(line)));
        } catch (const json::exception& e) {
          throw SchemaViolation(fmt::format("{}: {}", f.entries, e.what()));
        }
      }
      matrix = aggregate_domain_matrix(loaded.scores, entries);
    }
  }
  for (const auto& path : f.aggregates) {
    std::ifstream in(path);
    if (!in) throw FileUnreadable(fmt::format("cannot read {}", path));
    json doc;
    try {
      doc = json::parse(in);
      for (const auto& id : doc.at("run_ids")) run_ids.push_back(id.get<std::string>());
      for (const auto& m : doc.at("models")) aggregates.push_back(aggregate_from_json(m));
    } catch (const json::exception& e) {
      throw SchemaViolation(fmt::format("{}: {}", path, e.what()));
    }
  }
  if (aggregates.empty()) throw UsageError("leaderboard needs --scores or --aggregates");
  std::sort(run_ids.begin(), run_ids.end());
  run_ids.erase(std::unique(run_ids.begin(), run_ids.end()), run_ids.end());

  Leaderboard board = render_leaderboard(aggregates);
  out << board.to_text();
  if (matrix) out << '\n' << matrix->to_text();
  if (!f.out_dir.empty()) {
    fs::path dir(f.out_dir);
    write_text(dir / "leaderboard.txt", board.to_text() + runs_line(run_ids));
    write_text(dir / "leaderboard.tsv", "# " + runs_line(run_ids) + board.to_tsv());
    if (matrix) {
      write_text(dir / "domains.txt", matrix->to_text() + runs_line(run_ids));
      write_text(dir / "domains.tsv", "# " + runs_line(run_ids) + matrix->to_tsv());
    }
    fmt::print(out, "wrote {}\n", (dir / "leaderboard.txt").string());
  }
  return kExitOk;
}

struct EntryFlags {
  std::string entries, responses, entry, model;
  ConfigFlags config;
};

int cmd_drift(const EntryFlags& f, std::ostream& out) {
  EvalConfig config = checked(f.config.resolve());
  BenchEntry entry = find_entry(f.entries, f.entry);
  ResponseBundle bundle = find_response(f.responses, f.entry);
  const std::string text = text_for_drift(bundle);

  std::vector<JudgeRequest> requests;
  for (const auto& k : entry.faks) requests.push_back(make_relevance_request(entry.id, text, k, TargetKind::kFak));
  for (const auto& k : entry.fdks) requests.push_back(make_relevance_request(entry.id, text, k, TargetKind::kFdk));
  Judger judger(config.judger, make_backend(config.judger, f.config.fixture_path()));
  std::vector<JudgeOutcome> outcomes = judger.judge_all(requests);

  const FoldedText folded(text);
  std::vector<std::int64_t> fak_f, fdk_f;
  std::vector<int> fak_r, fdk_r;
  const std::string& model = bundle.model_name.empty() ? f.model : bundle.model_name;
  fmt::print(out, "entry {}{}\n", entry.id, model.empty() ? "" : "  model " + model);
  for (std::size_t i = 0; i < requests.size(); ++i) {
    const bool is_fak = requests[i].kind == TargetKind::kFak;
    const std::int64_t freq = folded.count(requests[i].target);
    int rele = kMinRelevance;
    std::string note;
    if (outcomes[i].verdict) {
      rele = static_cast<int>(outcomes[i].verdict->score.num());
    } else {
      note = fmt::format("  (unjudged: {})", outcomes[i].error_kind);
    }
    (is_fak ? fak_f : fdk_f).push_back(freq);
    (is_fak ? fak_r : fdk_r).push_back(rele);
    fmt::print(out, "  {} {:<32} freq={:<4} rele={}{}\n", to_string(requests[i].kind), requests[i].target, freq, rele, note);
  }
  const double fak = fak_drift(fak_f, fak_r, config.weights);
  const double fdk = fdk_drift(fdk_f, fdk_r, config.weights);
  fmt::print(out, "fak_drift={:.6f} fdk_drift={:.6f} semantic_drift={:.6f}\n", fak, fdk,
             semantic_drift(fak, fdk, config.weights));
  return kExitOk;
}

int cmd_trust(const EntryFlags& f, std::ostream& out) {
  EvalConfig config = checked(f.config.resolve());
  BenchEntry entry = find_entry(f.entries, f.entry);
  ResponseBundle bundle = find_response(f.responses, f.entry);
  TrustLinks links = links_for_trust(bundle);
  TrustResult t = compute_trust(entry.tsls, links.links, config.weights, config.trust_formula);

  fmt::print(out, "entry {}  formula {}\n", entry.id, to_string(config.trust_formula));
  for (const auto& tsl : entry.tsls) fmt::print(out, "  tsl  {}\n", tsl);
  for (const auto& link : links.links) fmt::print(out, "  link {}\n", link);
  fmt::print(out, "links={} dropped={} match_full={} match_host_only={} rate_full_hit={:.6f} rate_host_hit={:.6f} "
                  "boost={:.6f}\n",
             links.links.size(), links.dropped, t.match_full, t.match_host_only, t.rate_full_hit, t.rate_host_hit,
             t.boost);
  return kExitOk;
}

int cmd_config(const ConfigFlags& flags, std::ostream& out, std::ostream& err) {
  EvalConfig c = flags.resolve();
  out << config_to_json(c).dump(2) << '\n';
  auto problems = config_problems(c);
  for (const auto& p : problems) fmt::print(err, "config problem: {}\n", p);
  return problems.empty() ? kExitOk : kExitFailure;
}

}  // namespace

int run_cli(const std::vector<std::string>& args, std::ostream& out, std::ostream& err) {
  CLI::App app{"Rubric-based evaluation harness for deep research agent reports", "rbench"};
  app.require_subcommand(1);
  app.set_version_flag("--version", std::string(kToolVersion));

  std::string entries, grr;
  auto* validate = app.add_subcommand("validate", "Check an entry file and GRR catalog");
  validate->add_option("--entries", entries, "Entries file (JSON lines)")->required();
  validate->add_option("--grr", grr, "GRR catalog (JSON)")->required();

  EvaluateFlags ef;
  auto* evaluate = app.add_subcommand("evaluate", "Score one model's responses");
  evaluate->add_option("--entries", ef.entries, "Entries file (JSON lines)")->required()->check(CLI::ExistingFile);
  evaluate->add_option("--grr", ef.grr, "GRR catalog (JSON)")->required()->check(CLI::ExistingFile);
  evaluate->add_option("--responses", ef.responses, "Responses file (JSON lines)")->required()->check(CLI::ExistingFile);
  evaluate->add_option("--model", ef.model, "Model name")->required();
  evaluate->add_option("--out", ef.out_dir, "Output directory")->required();
  evaluate->add_option("--workers", ef.workers, "Entries scored concurrently")->check(CLI::PositiveNumber);
  evaluate->add_flag("--resume", ef.resume, "Keep entries already scored by the same run");
  evaluate->add_option("--transcripts", ef.transcripts, "Judger transcript log")->check(CLI::IsMember({"on", "off"}));
  evaluate->add_option("--domain", ef.domain, "Only entries of this domain code")->check(CLI::Range(0, 10));
  ef.config.attach(evaluate, true);

  std::vector<std::string> agg_scores;
  std::string agg_out;
  auto* aggregate = app.add_subcommand("aggregate", "Fold score files into per-model means");
  aggregate->add_option("--scores", agg_scores, "Score files")->required()->check(CLI::ExistingFile);
  aggregate->add_option("--out", agg_out, "Aggregate output file (JSON)");

  LeaderboardFlags lf;
  auto* leaderboard = app.add_subcommand("leaderboard", "Render the leaderboard and domain matrix");
  auto* lb_scores = leaderboard->add_option("--scores", lf.scores, "Score files")->check(CLI::ExistingFile);
  auto* lb_aggs = leaderboard->add_option("--aggregates", lf.aggregates, "Aggregate files")->check(CLI::ExistingFile);
  leaderboard->add_option("--entries", lf.entries, "Entries file, enables the domain matrix")
      ->check(CLI::ExistingFile)
      ->needs(lb_scores);
  leaderboard->add_option("--out", lf.out_dir, "Directory for .txt and .tsv exports");
  lb_scores->excludes(lb_aggs);

  EntryFlags df;
  auto* drift = app.add_subcommand("drift", "Keyword statistics and drift for one entry");
  drift->add_option("--entries", df.entries, "Entries file")->required()->check(CLI::ExistingFile);
  drift->add_option("--responses", df.responses, "Responses file")->required()->check(CLI::ExistingFile);
  drift->add_option("--entry", df.entry, "Entry id")->required();
  drift->add_option("--model", df.model, "Model name");
  df.config.attach(drift, true);

  EntryFlags tf;
  auto* trust = app.add_subcommand("trust", "Link matching and boost for one entry");
  trust->add_option("--entries", tf.entries, "Entries file")->required()->check(CLI::ExistingFile);
  trust->add_option("--responses", tf.responses, "Responses file")->required()->check(CLI::ExistingFile);
  trust->add_option("--entry", tf.entry, "Entry id")->required();
  tf.config.attach(trust, false);

  ConfigFlags cf;
  auto* config = app.add_subcommand("config", "Print the effective configuration");
  cf.attach(config, true);

  if (!args.empty() && !args.front().empty() && args.front().front() != '-') {
    const auto subs = app.get_subcommands([](CLI::App*) { return true; });
    if (std::none_of(subs.begin(), subs.end(), [&](const CLI::App* s) { return s->get_name() == args.front(); })) {
      fmt::print(err, "usage error: unknown subcommand '{}'\n", args.front());
      err << app.help();
      return kExitFailure;
    }
  }

  try {
    std::vector<std::string> reversed(args.rbegin(), args.rend());
    app.parse(reversed);
  } catch (const CLI::CallForHelp& e) {
    out << app.help();
    return kExitOk;
  } catch (const CLI::CallForAllHelp& e) {
    out << app.help("", CLI::AppFormatMode::All);
    return kExitOk;
  } catch (const CLI::CallForVersion& e) {
    out << kToolVersion << '\n';
    return kExitOk;
  } catch (const CLI::ParseError& e) {
    fmt::print(err, "usage error: {}\n", e.what());
    auto parsed = app.get_subcommands();
    err << (parsed.empty() ? app.help() : parsed.front()->help());
    return kExitFailure;
  }

  try {
    if (validate->parsed()) return cmd_validate(entries, grr, out);
    if (evaluate->parsed()) return cmd_evaluate(ef, out);
    if (aggregate->parsed()) return cmd_aggregate(agg_scores, agg_out, out);
    if (leaderboard->parsed()) return cmd_leaderboard(lf, out);
    if (drift->parsed()) return cmd_drift(df, out);
    if (trust->parsed()) return cmd_trust(tf, out);
    if (config->parsed()) return cmd_config(cf, out, err);
  } catch (const Error& e) {
    fmt::print(err, "error: {}\n", e.what());
    return kExitFailure;
  } catch (const std::exception& e) {
    fmt::print(err, "error: {}\n", e.what());
    return kExitFailure;
  }
  return kExitFailure;
}

}  // namespace rbench
