#include "rbench/aggregate.hpp"

#include <algorithm>
#include <set>
#include <unordered_map>

#include <fmt/format.h>

#include "rbench/errors.hpp"

namespace rbench {
namespace {

class Mean {
 public:
  void add(double v) {
    sum_ += v;
    ++n_;
  }
  std::size_t count() const { return n_; }
  double value() const { return n_ == 0 ? 0.0 : static_cast<double>(sum_ / static_cast<long double>(n_)); }
  std::optional<double> optional() const { return n_ == 0 ? std::nullopt : std::optional<double>(value()); }

 private:
  long double sum_ = 0.0L;
  std::size_t n_ = 0;
};

std::string format_value(LeaderboardColumn column, double v) {
  if (column == LeaderboardColumn::kUsage) return fmt::format("{:.0f}", v);
  return fmt::format("{:.4f}", v);
}

std::string pad_right(const std::string& s, std::size_t width) {
  return s.size() >= width ? s : s + std::string(width - s.size(), ' ');
}

std::string pad_left(const std::string& s, std::size_t width) {
  return s.size() >= width ? s : std::string(width - s.size(), ' ') + s;
}

std::string render_grid(const std::vector<std::vector<std::string>>& grid, std::size_t left_cols) {
  std::vector<std::size_t> widths;
  for (const auto& row : grid) {
    widths.resize(std::max(widths.size(), row.size()), 0);
    for (std::size_t c = 0; c < row.size(); ++c) widths[c] = std::max(widths[c], row[c].size());
  }
  std::string out;
  for (std::size_t r = 0; r < grid.size(); ++r) {
    std::string line;
    for (std::size_t c = 0; c < grid[r].size(); ++c) {
      if (c > 0) line += "  ";
      line += c < left_cols ? pad_right(grid[r][c], widths[c]) : pad_left(grid[r][c], widths[c]);
    }
    while (!line.empty() && line.back() == ' ') line.pop_back();
    out += line;
    out += '\n';
    if (r == 0) {
      std::size_t total = 0;
      for (auto w : widths) total += w;
      out += std::string(total + 2 * (widths.size() - 1), '-');
      out += '\n';
    }
  }
  return out;
}

std::string join_tsv(const std::vector<std::vector<std::string>>& grid) {
  std::string out;
  for (const auto& row : grid) {
    for (std::size_t c = 0; c < row.size(); ++c) {
      if (c > 0) out += '\t';
      out += row[c];
    }
    out += '\n';
  }
  return out;
}

}  // namespace

ScoreMeans compute_means(std::span<const EntryScore> scores) {
  Mean quality, one_minus, boost, integrated, usage, cpt;
  for (const auto& s : scores) {
    quality.add(s.quality);
    one_minus.add(1.0 - s.semantic_drift);
    boost.add(s.trust.boost);
    integrated.add(s.integrated);
    usage.add(static_cast<double>(s.token_total));
    if (s.contribution_per_token) cpt.add(*s.contribution_per_token);
  }
  ScoreMeans m;
  m.n_entries = scores.size();
  m.mean_quality = quality.value();
  m.mean_one_minus_drift = one_minus.value();
  m.mean_boost = boost.value();
  m.mean_integrated = integrated.value();
  m.mean_usage_tokens = usage.value();
  m.mean_contribution_per_token = cpt.optional();
  return m;
}

ModelAggregate aggregate_model(std::span<const EntryScore> scores) {
  if (scores.empty()) throw EmptyInput("no entry scores to aggregate");
  const std::string& model = scores.front().model_name;
  for (const auto& s : scores) {
    if (s.model_name != model) {
      throw MixedModels(fmt::format("scores from '{}' and '{}' in one aggregate", model, s.model_name));
    }
  }

  ModelAggregate agg;
  agg.model_name = model;
  agg.means = compute_means(scores);

  std::map<int, std::vector<EntryScore>> by_domain;
  Mean reason, search, ri;
  for (const auto& s : scores) {
    by_domain[s.domain_code].push_back(s);
    if (s.trace) {
      reason.add(static_cast<double>(s.trace->reason_times));
      search.add(static_cast<double>(s.trace->search_times));
    }
    if (s.retrieval_index) ri.add(*s.retrieval_index);
    if (!s.complete()) ++agg.n_incomplete;
  }
  for (const auto& [domain, subset] : by_domain) agg.per_domain[domain] = compute_means(subset);
  agg.mean_reason_times = reason.optional();
  agg.mean_search_times = search.optional();
  agg.mean_retrieval_index = ri.optional();
  return agg;
}

bool leaderboard_before(const ModelAggregate& a, const ModelAggregate& b) {
  if (a.means.mean_integrated != b.means.mean_integrated) return a.means.mean_integrated > b.means.mean_integrated;
  if (a.means.mean_quality != b.means.mean_quality) return a.means.mean_quality > b.means.mean_quality;
  return a.model_name < b.model_name;
}

std::vector<ModelAggregate> aggregate_by_model(std::span<const EntryScore> scores) {
  std::map<std::string, std::vector<EntryScore>> groups;
  for (const auto& s : scores) groups[s.model_name].push_back(s);
  std::vector<ModelAggregate> out;
  for (const auto& [name, subset] : groups) out.push_back(aggregate_model(subset));
  std::stable_sort(out.begin(), out.end(), leaderboard_before);
  return out;
}

std::string_view column_title(LeaderboardColumn column) {
  switch (column) {
    case LeaderboardColumn::kQuality: return "Quality";
    case LeaderboardColumn::kOneMinusDrift: return "1-SDrift";
    case LeaderboardColumn::kBoost: return "TBoost";
    case LeaderboardColumn::kIntegrated: return "InteScore";
    case LeaderboardColumn::kUsage: return "Usage";
    case LeaderboardColumn::kContributionPerToken: return "C/Token";
  }
  return "";
}

Leaderboard render_leaderboard(std::span<const ModelAggregate> aggregates) {
  std::vector<const ModelAggregate*> order;
  for (const auto& a : aggregates) order.push_back(&a);
  std::stable_sort(order.begin(), order.end(), [](const auto* a, const auto* b) { return leaderboard_before(*a, *b); });

  Leaderboard board;
  for (const auto* a : order) {
    LeaderboardRow row;
    row.model_name = a->model_name;
    row.n_entries = a->means.n_entries;
    row.values = {a->means.mean_quality,      a->means.mean_one_minus_drift, a->means.mean_boost,
                  a->means.mean_integrated,   a->means.mean_usage_tokens,    a->means.mean_contribution_per_token};
    board.rows.push_back(std::move(row));
  }

  for (std::size_t c = 0; c < kLeaderboardColumns; ++c) {
    std::set<double, std::greater<>> distinct;
    for (const auto& row : board.rows) {
      if (row.values[c]) distinct.insert(*row.values[c]);
    }
    auto it = distinct.begin();
    std::optional<double> best = it != distinct.end() ? std::optional<double>(*it++) : std::nullopt;
    std::optional<double> second = it != distinct.end() ? std::optional<double>(*it) : std::nullopt;
    for (auto& row : board.rows) {
      if (!row.values[c]) continue;
      if (best && *row.values[c] == *best) row.ranks[c] = Rank::kBest;
      else if (second && *row.values[c] == *second) row.ranks[c] = Rank::kSecond;
    }
  }
  return board;
}

std::string Leaderboard::to_text() const {
  std::vector<std::vector<std::string>> grid;
  std::vector<std::string> header = {"Model", "N"};
  for (std::size_t c = 0; c < kLeaderboardColumns; ++c) header.emplace_back(column_title(static_cast<LeaderboardColumn>(c)));
  grid.push_back(std::move(header));
  for (const auto& row : rows) {
    std::vector<std::string> line = {row.model_name, std::to_string(row.n_entries)};
    for (std::size_t c = 0; c < kLeaderboardColumns; ++c) {
      if (!row.values[c]) {
        line.emplace_back("- ");
        continue;
      }
      const char mark = row.ranks[c] == Rank::kBest ? '*' : row.ranks[c] == Rank::kSecond ? '+' : ' ';
      line.push_back(format_value(static_cast<LeaderboardColumn>(c), *row.values[c]) + mark);
    }
    grid.push_back(std::move(line));
  }
  return render_grid(grid, 1) + "(* highest, + second-highest per column)\n";
}

std::string Leaderboard::to_tsv() const {
  std::vector<std::vector<std::string>> grid;
  std::vector<std::string> header = {"model", "n_entries"};
  for (std::size_t c = 0; c < kLeaderboardColumns; ++c) header.emplace_back(column_title(static_cast<LeaderboardColumn>(c)));
  grid.push_back(std::move(header));
  for (const auto& row : rows) {
    std::vector<std::string> line = {row.model_name, std::to_string(row.n_entries)};
    for (const auto& v : row.values) line.push_back(v ? fmt::format("{}", *v) : "");
    grid.push_back(std::move(line));
  }
  return join_tsv(grid);
}

const ScoreMeans* DomainMatrix::cell(int domain, const std::string& model) const {
  auto it = cells.find({domain, model});
  return it == cells.end() ? nullptr : &it->second;
}

DomainMatrix aggregate_domain_matrix(std::span<const EntryScore> all_scores, std::span<const BenchEntry> entries) {
  std::unordered_map<std::string_view, int> domain_of;
  for (const auto& e : entries) domain_of.emplace(e.id, e.domain_code);

  std::map<std::pair<int, std::string>, std::vector<EntryScore>> groups;
  std::map<std::string, std::vector<EntryScore>> by_model;
  std::set<int> domains;
  for (const auto& s : all_scores) {
    auto it = domain_of.find(s.entry_id);
    if (it == domain_of.end()) throw UnresolvedEntry(fmt::format("score for unknown entry '{}'", s.entry_id));
    domains.insert(it->second);
    groups[{it->second, s.model_name}].push_back(s);
    groups[{DomainMatrix::kMix, s.model_name}].push_back(s);
    by_model[s.model_name].push_back(s);
  }

  DomainMatrix m;
  m.domains.assign(domains.begin(), domains.end());
  m.domains.push_back(DomainMatrix::kMix);
  for (const auto& [key, subset] : groups) m.cells[key] = compute_means(subset);

  std::vector<ModelAggregate> order;
  for (const auto& [name, subset] : by_model) order.push_back(aggregate_model(subset));
  std::stable_sort(order.begin(), order.end(), leaderboard_before);
  for (const auto& a : order) m.models.push_back(a.model_name);
  return m;
}

namespace {

constexpr std::array<std::string_view, 4> kMatrixMetrics = {"QUA", "SDR", "TBO", "ITS"};

double matrix_metric(const ScoreMeans& m, std::size_t k) {
  switch (k) {
    case 0: return m.mean_quality;
    case 1: return m.mean_one_minus_drift;
    case 2: return m.mean_boost;
    default: return m.mean_integrated;
  }
}

std::string domain_label(int d) { return d == DomainMatrix::kMix ? "MIX" : fmt::format("{:02}", d); }

std::vector<std::vector<std::string>> matrix_grid(const DomainMatrix& m, bool exact) {
  std::vector<std::vector<std::string>> grid;
  std::vector<std::string> header = {"D", "M"};
  header.insert(header.end(), m.models.begin(), m.models.end());
  grid.push_back(std::move(header));
  for (int d : m.domains) {
    for (std::size_t k = 0; k < kMatrixMetrics.size(); ++k) {
      std::vector<std::string> line = {domain_label(d), std::string(kMatrixMetrics[k])};
      for (const auto& model : m.models) {
        const ScoreMeans* c = m.cell(d, model);
        if (c == nullptr) {
          line.emplace_back(exact ? "" : "-");
        } else {
          double v = matrix_metric(*c, k);
          line.push_back(exact ? fmt::format("{}", v) : (k == 3 ? fmt::format("{:.2f}", v) : fmt::format("{:.4f}", v)));
        }
      }
      grid.push_back(std::move(line));
    }
  }
  return grid;
}

}  // namespace

std::string DomainMatrix::to_text() const { return render_grid(matrix_grid(*this, false), 2); }

std::string DomainMatrix::to_tsv() const { return join_tsv(matrix_grid(*this, true)); }

}  // namespace rbench
