// Copyright 2026 The HalMit Authors.
//
// Licensed under the Apache License, Version 2.0 (the "License");
// you may not use this file except in compliance with the License.
// You may obtain a copy of the License at
//
//     http://www.apache.org/licenses/LICENSE-2.0
//
// Unless required by applicable law or agreed to in writing, software
// distributed under the License is distributed on an "AS IS" BASIS,
// WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
// See the License for the specific language governing permissions and
// limitations under the License.

#include "halmit/eval_harness.h"

#include <algorithm>
#include <fstream>
#include <memory>
#include <ostream>
#include <sstream>

#include <spdlog/spdlog.h>

#include "halmit/error.h"
#include "halmit/evaluator.h"
#include "halmit/metrics.h"
#include "halmit/text.h"
#include "json.hpp"
#include "parallel.h"

namespace halmit {
namespace {

using nlohmann::json;

constexpr size_t kMaxSkipReasons = 20;

std::string ReadFile(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw Error(ErrorCode::kIo, "cannot read " + path.string());
  std::stringstream buf;
  buf << in.rdbuf();
  return buf.str();
}

// RFC 4180 records: quoted fields may hold separators, quotes ("") and
// line breaks.
std::vector<std::vector<std::string>> ParseCsv(const std::string& text) {
  std::vector<std::vector<std::string>> rows;
  std::vector<std::string> row;
  std::string field;
  bool quoted = false;
  bool any = false;
  for (size_t i = 0; i < text.size(); ++i) {
    const char c = text[i];
    if (quoted) {
      if (c == '"' && i + 1 < text.size() && text[i + 1] == '"') {
        field.push_back('"');
        ++i;
      } else if (c == '"') {
        quoted = false;
      } else {
        field.push_back(c);
      }
      continue;
    }
    if (c == '"') {
      quoted = true;
      any = true;
    } else if (c == ',') {
      row.push_back(std::move(field));
      field.clear();
      any = true;
    } else if (c == '\n' || c == '\r') {
      if (c == '\r' && i + 1 < text.size() && text[i + 1] == '\n') ++i;
      if (any || !field.empty()) {
        row.push_back(std::move(field));
        rows.push_back(std::move(row));
      }
      row.clear();
      field.clear();
      any = false;
    } else {
      field.push_back(c);
      any = true;
    }
  }
  if (any || !field.empty()) {
    row.push_back(std::move(field));
    rows.push_back(std::move(row));
  }
  return rows;
}

class Skips {
 public:
  explicit Skips(IngestResult& result) : result_(result) {}
  void Add(const std::string& reason) {
    ++result_.skipped;
    if (result_.skip_reasons.size() < kMaxSkipReasons) result_.skip_reasons.push_back(reason);
  }

 private:
  IngestResult& result_;
};

void AddItem(IngestResult& result, Skips& skips, QaItem item, const std::string& where) {
  item.question = Trim(item.question);
  item.reference_answer = Trim(item.reference_answer);
  if (item.question.empty()) {
    skips.Add(where + ": missing question");
  } else if (item.reference_answer.empty()) {
    skips.Add(where + ": missing reference answer");
  } else {
    result.items.push_back(std::move(item));
  }
}

void IngestCanonical(const std::string& text, IngestResult& result) {
  Skips skips(result);
  std::istringstream in(text);
  std::string line;
  int64_t n = 0;
  while (std::getline(in, line)) {
    ++n;
    if (Trim(line).empty()) continue;
    const std::string where = "line " + std::to_string(n);
    try {
      const json j = json::parse(line);
      QaItem item;
      item.id = j.value("id", std::to_string(n));
      item.domain = j.value("domain", "");
      item.question = j.value("question", "");
      item.reference_answer = j.value("reference_answer", "");
      AddItem(result, skips, std::move(item), where);
    } catch (const json::exception&) {
      skips.Add(where + ": not a JSON object with string fields");
    }
  }
}

void IngestCsv(const std::string& text, const std::vector<std::string>& columns, const std::string& id_prefix,
               IngestResult& result) {
  Skips skips(result);
  const auto rows = ParseCsv(text);
  if (rows.empty()) return;
  // columns: question, answer, domain.
  std::vector<int> index(columns.size(), -1);
  for (size_t c = 0; c < rows[0].size(); ++c) {
    const std::string name = ToLower(Trim(rows[0][c]));
    for (size_t k = 0; k < columns.size(); ++k) {
      if (name == columns[k]) index[k] = static_cast<int>(c);
    }
  }
  if (index[0] < 0 || index[1] < 0) {
    throw Error(ErrorCode::kInvalidArgument, "CSV header lacks the question or answer column");
  }
  for (size_t r = 1; r < rows.size(); ++r) {
    const auto& row = rows[r];
    auto cell = [&row](int i) { return i >= 0 && static_cast<size_t>(i) < row.size() ? row[i] : std::string(); };
    QaItem item;
    item.id = id_prefix + std::to_string(r);
    item.question = cell(index[0]);
    item.reference_answer = cell(index[1]);
    item.domain = Trim(cell(index[2]));
    AddItem(result, skips, std::move(item), "row " + std::to_string(r));
  }
}

void IngestSquad(const std::string& text, IngestResult& result) {
  Skips skips(result);
  json j;
  try {
    j = json::parse(text);
  } catch (const json::exception& e) {
    throw Error(ErrorCode::kInvalidArgument, std::string("SQuAD file is not JSON: ") + e.what());
  }
  if (!j.contains("data") || !j["data"].is_array()) {
    throw Error(ErrorCode::kInvalidArgument, "SQuAD file lacks a data array");
  }
  for (const auto& article : j["data"]) {
    const std::string title = article.value("title", "");
    if (!article.contains("paragraphs")) continue;
    for (const auto& para : article["paragraphs"]) {
      if (!para.contains("qas")) continue;
      for (const auto& qa : para["qas"]) {
        QaItem item;
        item.id = qa.value("id", "");
        item.domain = title;
        item.question = qa.value("question", "");
        if (qa.contains("answers") && qa["answers"].is_array() && !qa["answers"].empty()) {
          item.reference_answer = qa["answers"][0].value("text", "");
        }
        AddItem(result, skips, std::move(item), "question " + qa.value("id", std::string("?")));
      }
    }
  }
}

QaItem SyntheticItem(const SyntheticWorld& world, std::string query, std::string domain, size_t i) {
  const auto region = world.Nearest(world.embedder().Embed(query)).first;
  return QaItem{"eval-" + std::to_string(i), std::move(domain), std::move(query), world.FaithfulAnswer(region)};
}

json OptionalJson(const std::optional<double>& x) { return x ? json(*x) : json(nullptr); }

json MetricsJson(const MetricsReport& m) {
  return {{"n", m.n},
          {"positives", m.positives},
          {"auroc", OptionalJson(m.auroc)},
          {"auc_pr", OptionalJson(m.auc_pr)},
          {"f1", m.f1},
          {"accuracy", m.accuracy},
          {"reasons", m.reasons}};
}

}  // namespace

std::optional<DatasetFormat> ParseDatasetFormat(std::string_view name) {
  const std::string n = ToLower(name);
  if (n == "canonical") return DatasetFormat::kCanonical;
  if (n == "medquad") return DatasetFormat::kMedquad;
  if (n == "squad") return DatasetFormat::kSquad;
  if (n == "truthfulqa") return DatasetFormat::kTruthfulqa;
  return std::nullopt;
}

IngestResult Ingest(const std::filesystem::path& path, DatasetFormat format) {
  const std::string text = ReadFile(path);
  IngestResult result;
  switch (format) {
    case DatasetFormat::kCanonical:
      IngestCanonical(text, result);
      break;
    case DatasetFormat::kMedquad:
      IngestCsv(text, {"question", "answer", "focus_area"}, "medquad-", result);
      break;
    case DatasetFormat::kSquad:
      IngestSquad(text, result);
      break;
    case DatasetFormat::kTruthfulqa:
      IngestCsv(text, {"question", "best answer", "category"}, "truthfulqa-", result);
      break;
  }
  if (result.items.empty()) {
    throw Error(ErrorCode::kInvalidArgument, path.string() + " holds no valid rows (" +
                                                 std::to_string(result.skipped) + " skipped)");
  }
  if (result.skipped > 0) spdlog::warn("{}: skipped {} malformed rows", path.string(), result.skipped);
  return result;
}

void WriteCanonical(std::span<const QaItem> items, std::ostream& out) {
  for (const auto& item : items) {
    out << json{{"id", item.id},
                {"domain", item.domain},
                {"question", item.question},
                {"reference_answer", item.reference_answer}}
               .dump()
        << '\n';
  }
}

bool GqaLabeler::Hallucinated(const QaItem& item, ChatBackend& target) {
  const ChatTurn turn{Role::kUser, item.question};
  const std::string answer = target.Complete(std::span<const ChatTurn>(&turn, 1), 0);
  return LabelGqa(answer, item.reference_answer).hallucinated;
}

bool SyntheticLabeler::Hallucinated(const QaItem& item, ChatBackend& /*target*/) {
  return !world_.InCompetence(item.question);
}

std::vector<ScoredItem> ScoreItems(std::span<const QaItem> items, const Monitor& monitor,
                                   Labeler& labeler, ChatBackend& target,
                                   const std::optional<std::string>& domain, int workers) {
  std::vector<ScoredItem> out(items.size());
  // Labelers may keep state; only the monitor runs concurrently.
  std::vector<std::optional<Verdict>> verdicts(items.size());
  internal::ParallelFor(items.size(), workers,
                        [&](size_t i) { verdicts[i] = monitor.Check(items[i].question, domain); });
  for (size_t i = 0; i < items.size(); ++i) {
    out[i].item = items[i];
    out[i].label = labeler.Hallucinated(items[i], target);
    out[i].flagged = verdicts[i]->flagged;
    out[i].reason = verdicts[i]->reason;
    out[i].monitor_score = MonitorScore(*verdicts[i], monitor.config());
  }
  return out;
}

MetricsReport ComputeMetrics(std::span<const ScoredItem> items) {
  MetricsReport m;
  std::vector<double> scores;
  const auto labels = std::make_unique<bool[]>(items.size());
  const auto flagged = std::make_unique<bool[]>(items.size());
  for (size_t i = 0; i < items.size(); ++i) {
    const ScoredItem& s = items[i];
    scores.push_back(s.monitor_score);
    labels[i] = s.label;
    flagged[i] = s.flagged;
    m.positives += s.label ? 1 : 0;
    ++m.reasons[std::string(VerdictReasonName(s.reason))];
  }
  m.n = static_cast<int64_t>(items.size());
  if (items.empty()) return m;
  const std::span<const bool> label_span(labels.get(), items.size());
  const std::span<const bool> flag_span(flagged.get(), items.size());
  if (m.positives > 0 && m.positives < m.n) m.auroc = Auroc(scores, label_span);
  if (m.positives > 0) m.auc_pr = AucPr(scores, label_span);
  const F1Accuracy fa = ComputeF1Accuracy(flag_span, label_span);
  m.f1 = fa.f1;
  m.accuracy = fa.accuracy;
  return m;
}

BenchmarkReport RunBenchmark(const SyntheticWorld& world, const BenchmarkSettings& settings) {
  if (settings.n_eval < 2) throw Error(ErrorCode::kInvalidArgument, "n_eval must be at least 2");
  BenchmarkReport report;
  auto target = MakeSyntheticBackend(world, "target");
  auto generator = MakeSyntheticBackend(world, "generator");
  auto judge = MakeSyntheticBackend(world, "judge");
  auto oracle = MakeOracle(settings.oracle);
  VectorStore store(world.dimension());

  IFSPConfig explore = settings.explore;
  explore.seed = settings.seed;
  const ExploreAgents agents{target.get(), generator.get(), judge.get(), oracle.get(), &world.embedder()};
  report.exploration = Explore(settings.domain, agents, store, settings.policy, explore);
  report.store_size = static_cast<int64_t>(store.size());
  if (store.size() == 0) {
    report.warnings.push_back("exploration stored no boundary records; metrics are degenerate");
    spdlog::warn("benchmark: {}", report.warnings.back());
  }

  // Stratified draw: equal numbers inside and outside competence.
  const size_t want_out = static_cast<size_t>((settings.n_eval + 1) / 2);
  const size_t want_in = static_cast<size_t>(settings.n_eval) - want_out;
  std::vector<QaItem> inside;
  std::vector<QaItem> outside;
  const int64_t max_draws = 100LL * settings.n_eval;
  for (int64_t d = 0; d < max_draws && (inside.size() < want_in || outside.size() < want_out); ++d) {
    const std::string variant = "eval-" + std::to_string(settings.seed) + "-" + std::to_string(d);
    std::string q = FreshQuery(settings.domain, variant, *generator);
    const bool in = world.InCompetence(q);
    auto& bucket = in ? inside : outside;
    if (bucket.size() < (in ? want_in : want_out)) {
      bucket.push_back(SyntheticItem(world, std::move(q), settings.domain, static_cast<size_t>(d)));
    }
  }
  if (inside.size() < want_in || outside.size() < want_out) {
    report.warnings.push_back("could not draw a stratified evaluation set (" + std::to_string(inside.size()) +
                              " inside, " + std::to_string(outside.size()) + " outside)");
    spdlog::warn("benchmark: {}", report.warnings.back());
  }
  std::vector<QaItem> items;
  for (size_t i = 0; i < std::max(inside.size(), outside.size()); ++i) {
    if (i < inside.size()) items.push_back(inside[i]);
    if (i < outside.size()) items.push_back(outside[i]);
  }

  const Monitor monitor(store, MonitorAgents{&world.embedder(), target.get(), oracle.get()}, settings.monitor);
  SyntheticLabeler labeler(world);
  report.items = ScoreItems(items, monitor, labeler, *target, settings.domain, settings.workers);
  report.metrics = ComputeMetrics(report.items);

  if (report.metrics.auroc) {
    std::vector<double> margins;
    const auto labels = std::make_unique<bool[]>(report.items.size());
    for (size_t i = 0; i < report.items.size(); ++i) {
      margins.push_back(world.Nearest(world.embedder().Embed(report.items[i].item.question)).second);
      labels[i] = report.items[i].label;
    }
    report.oracle_auroc = Auroc(margins, std::span<const bool>(labels.get(), report.items.size()));
  }
  return report;
}

std::string MetricsReportToJson(const MetricsReport& metrics) { return MetricsJson(metrics).dump(2); }

std::string BenchmarkReportToJson(const BenchmarkReport& r) {
  json j = {{"metrics", MetricsJson(r.metrics)},
            {"oracle_auroc", OptionalJson(r.oracle_auroc)},
            {"store_size", r.store_size},
            {"exploration", json::parse(ReportToJson(r.exploration))},
            {"warnings", r.warnings}};
  return j.dump(2);
}

std::optional<SweepParameter> ParseSweepParameter(std::string_view name) {
  if (name == "gamma_stop") return SweepParameter::kGammaStop;
  if (name == "epsilon_sim") return SweepParameter::kEpsilonSim;
  return std::nullopt;
}

std::string_view SweepParameterName(SweepParameter p) {
  return p == SweepParameter::kGammaStop ? "gamma_stop" : "epsilon_sim";
}

std::vector<SweepRow> Sweep(const SyntheticWorld& world, SweepParameter parameter,
                            std::span<const double> values, const BenchmarkSettings& base,
                            int parallel_cells) {
  if (values.empty()) throw Error(ErrorCode::kInvalidArgument, "sweep needs values");
  std::vector<SweepRow> rows(values.size());
  internal::ParallelFor(values.size(), parallel_cells, [&](size_t i) {
    SweepRow& row = rows[i];
    row.value = values[i];
    BenchmarkSettings s = base;
    if (parameter == SweepParameter::kGammaStop) {
      s.explore.gamma_stop = values[i];
    } else {
      s.monitor.epsilon_sim = values[i];
    }
    try {
      const BenchmarkReport r = RunBenchmark(world, s);
      row.accuracy = r.metrics.accuracy;
      row.f1 = r.metrics.f1;
      row.auroc = r.metrics.auroc;
    } catch (const Error& e) {
      row.error = e.what();
      spdlog::warn("sweep cell {}={} failed: {}", SweepParameterName(parameter), values[i], row.error);
    }
  });
  return rows;
}

std::string SweepTableToJson(SweepParameter parameter, std::span<const SweepRow> rows) {
  json table = json::array();
  for (const auto& r : rows) {
    table.push_back({{"value", r.value},
                     {"accuracy", OptionalJson(r.accuracy)},
                     {"auroc", OptionalJson(r.auroc)},
                     {"f1", OptionalJson(r.f1)},
                     {"error", r.error}});
  }
  return json{{"parameter", SweepParameterName(parameter)}, {"rows", table}}.dump(2);
}

double FinalStepsMeanEntropy(const ExplorationReport& report, int steps) {
  const auto& t = report.entropy_trajectory;
  if (t.empty() || steps < 1) throw Error(ErrorCode::kInvalidArgument, "no exploration steps");
  const size_t n = std::min(t.size(), static_cast<size_t>(steps));
  double sum = 0.0;
  for (size_t i = t.size() - n; i < t.size(); ++i) sum += t[i].second;
  return sum / static_cast<double>(n);
}

void WriteEntropyPlot(const ExplorationReport& report, std::ostream& out) {
  for (size_t i = 0; i < report.entropy_trajectory.size(); ++i) {
    out << i + 1 << ' ' << report.entropy_trajectory[i].second << '\n';
  }
}

std::vector<PolicySample> CollectPolicySamples(const SyntheticWorld& world, std::string_view domain,
                                               const IFSPConfig& explore, int collect_queries,
                                               uint64_t seed) {
  if (collect_queries < 1) throw Error(ErrorCode::kInvalidArgument, "reward collection needs a query budget");
  auto target = MakeSyntheticBackend(world, "target");
  auto generator = MakeSyntheticBackend(world, "generator");
  auto judge = MakeSyntheticBackend(world, "judge");
  TokenOverlapOracle oracle(0.5);
  const ExploreAgents agents{target.get(), generator.get(), judge.get(), &oracle, &world.embedder()};
  IFSPConfig collect = explore;
  collect.probabilities = kUniformProbabilities;
  collect.expand_all_transforms = true;
  collect.gamma_stop = 1.0;
  collect.max_queries = collect_queries;
  collect.seed = seed;
  std::stringstream log;
  VectorStore store(world.dimension());
  Explore(domain, agents, store, nullptr, collect, &log);
  return ReadPolicySamples(log);
}

std::vector<ConvergenceRun> RunConvergence(const SyntheticWorld& world,
                                           const ConvergenceSettings& settings, int parallel_runs) {
  if (settings.runs < 1) throw Error(ErrorCode::kInvalidArgument, "convergence needs a run");
  std::vector<ConvergenceRun> runs(static_cast<size_t>(settings.runs));
  internal::ParallelFor(runs.size(), parallel_runs, [&](size_t i) {
    auto target = MakeSyntheticBackend(world, "target");
    auto generator = MakeSyntheticBackend(world, "generator");
    auto judge = MakeSyntheticBackend(world, "judge");
    TokenOverlapOracle oracle(0.5);
    const ExploreAgents agents{target.get(), generator.get(), judge.get(), &oracle, &world.embedder()};
    ConvergenceRun& run = runs[i];
    run.seed = settings.seed + i;

    // Reward collection on a separate seed stream.
    const auto samples = CollectPolicySamples(world, settings.domain, settings.explore,
                                              settings.collect_queries, MixSeed(run.seed ^ 0x636f6c6cULL));
    run.training_samples = static_cast<int64_t>(samples.size());
    TrainConfig train = settings.train;
    train.rng_seed = run.seed;
    const TrainResult trained = Train(samples, train);
    run.initial_loss = trained.initial_loss;
    run.final_loss = trained.loss_curve.empty() ? trained.initial_loss : trained.loss_curve.back();

    IFSPConfig explore = settings.explore;
    explore.seed = run.seed;
    explore.expand_all_transforms = false;
    {
      VectorStore store(world.dimension());
      run.reinforced = FinalStepsMeanEntropy(Explore(settings.domain, agents, store, &trained.net, explore),
                                             settings.final_steps);
    }
    explore.probabilities = kUniformProbabilities;
    {
      VectorStore store(world.dimension());
      run.uniform = FinalStepsMeanEntropy(Explore(settings.domain, agents, store, nullptr, explore),
                                          settings.final_steps);
    }
  });
  return runs;
}

std::string ConvergenceRunsToJson(std::span<const ConvergenceRun> runs) {
  json rows = json::array();
  int wins = 0;
  for (const auto& r : runs) {
    rows.push_back({{"seed", r.seed},
                    {"training_samples", r.training_samples},
                    {"initial_loss", r.initial_loss},
                    {"final_loss", r.final_loss},
                    {"reinforced", r.reinforced},
                    {"uniform", r.uniform}});
    if (r.reinforced > r.uniform) ++wins;
  }
  return json{{"runs", rows}, {"reinforced_higher", wins}}.dump(2);
}

}  // namespace halmit
