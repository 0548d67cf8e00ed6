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

// Datasets, scoring of monitor verdicts against labels, and the synthetic
// benchmark, sweep and convergence experiments.

#ifndef HALMIT_EVAL_HARNESS_H_
#define HALMIT_EVAL_HARNESS_H_

#include <cstdint>
#include <filesystem>
#include <iosfwd>
#include <map>
#include <optional>
#include <span>
#include <string>
#include <string_view>
#include <vector>

#include "halmit/chat.h"
#include "halmit/fractal_explorer.h"
#include "halmit/monitor.h"
#include "halmit/policy.h"
#include "halmit/semantic_entropy.h"
#include "halmit/synthetic_world.h"

namespace halmit {

struct QaItem {
  std::string id;
  std::string domain;
  std::string question;
  std::string reference_answer;
};

// canonical: JSON lines {id, domain, question, reference_answer}.
// medquad:   CSV with header question,answer,source,focus_area; the
//            focus area is the domain.
// squad:     SQuAD v1/v2 JSON; article title is the domain, the first
//            answer text the reference. Unanswerable questions are skipped.
// truthfulqa: CSV with header columns Category, Question, Best Answer.
enum class DatasetFormat { kCanonical, kMedquad, kSquad, kTruthfulqa };
std::optional<DatasetFormat> ParseDatasetFormat(std::string_view name);

struct IngestResult {
  std::vector<QaItem> items;
  int64_t skipped = 0;
  std::vector<std::string> skip_reasons;  // first few
};

// Throws kIo when unreadable and kInvalidArgument when no row is valid.
IngestResult Ingest(const std::filesystem::path& path, DatasetFormat format);
void WriteCanonical(std::span<const QaItem> items, std::ostream& out);

// The only part of the evaluation pipeline that differs between datasets
// with reference answers and the synthetic world.
class Labeler {
 public:
  virtual ~Labeler() = default;
  virtual bool Hallucinated(const QaItem& item, ChatBackend& target) = 0;
};

// Asks the target once and compares with the reference answer.
class GqaLabeler : public Labeler {
 public:
  bool Hallucinated(const QaItem& item, ChatBackend& target) override;
};

// Ground truth from the world's competence predicate.
class SyntheticLabeler : public Labeler {
 public:
  explicit SyntheticLabeler(const SyntheticWorld& world) : world_(world) {}
  bool Hallucinated(const QaItem& item, ChatBackend& target) override;

 private:
  const SyntheticWorld& world_;
};

struct ScoredItem {
  QaItem item;
  double monitor_score = 0.0;
  bool label = false;  // hallucinated
  bool flagged = false;
  VerdictReason reason = VerdictReason::kEmptyStore;
};

std::vector<ScoredItem> ScoreItems(std::span<const QaItem> items, const Monitor& monitor,
                                   Labeler& labeler, ChatBackend& target,
                                   const std::optional<std::string>& domain, int workers = 1);

struct MetricsReport {
  int64_t n = 0;
  int64_t positives = 0;
  std::optional<double> auroc;   // null with a single class
  std::optional<double> auc_pr;  // null without positives
  double f1 = 0.0;
  double accuracy = 0.0;
  std::map<std::string, int64_t> reasons;
};

MetricsReport ComputeMetrics(std::span<const ScoredItem> items);
std::string MetricsReportToJson(const MetricsReport& metrics);

struct BenchmarkSettings {
  std::string domain = "reference";
  IFSPConfig explore;
  MonitorConfig monitor;
  EquivalenceOracleSpec oracle;
  int n_eval = 400;
  uint64_t seed = 0;
  int workers = 1;
  const ValueNetwork* policy = nullptr;
};

struct BenchmarkReport {
  MetricsReport metrics;
  // Same items ranked by distance beyond the nearest competence boundary.
  std::optional<double> oracle_auroc;
  ExplorationReport exploration;
  int64_t store_size = 0;
  std::vector<ScoredItem> items;
  std::vector<std::string> warnings;
};

// Explores a fresh store with the world's synthetic agents, draws n_eval
// queries (half inside competence, half outside) and scores the monitor.
BenchmarkReport RunBenchmark(const SyntheticWorld& world, const BenchmarkSettings& settings);
std::string BenchmarkReportToJson(const BenchmarkReport& report);

enum class SweepParameter { kGammaStop, kEpsilonSim };
std::optional<SweepParameter> ParseSweepParameter(std::string_view name);
std::string_view SweepParameterName(SweepParameter p);

struct SweepRow {
  double value = 0.0;
  std::optional<double> accuracy;
  std::optional<double> auroc;
  std::optional<double> f1;
  std::string error;
};

// One benchmark per value with shared seeds. A failing cell records its
// error and the sweep continues.
std::vector<SweepRow> Sweep(const SyntheticWorld& world, SweepParameter parameter,
                            std::span<const double> values, const BenchmarkSettings& base,
                            int parallel_cells = 1);
std::string SweepTableToJson(SweepParameter parameter, std::span<const SweepRow> rows);

// Mean entropy of the last `steps` judged queries.
double FinalStepsMeanEntropy(const ExplorationReport& report, int steps);
// Two columns: step index, entropy.
void WriteEntropyPlot(const ExplorationReport& report, std::ostream& out);

struct ConvergenceSettings {
  std::string domain = "reference";
  IFSPConfig explore;  // guided and uniform phases
  // Reward collection explores with every transformation until this many
  // queries are judged, ignoring gamma_stop.
  int collect_queries = 1000;
  TrainConfig train;
  int runs = 10;
  int final_steps = 30;
  uint64_t seed = 0;
};

struct ConvergenceRun {
  uint64_t seed = 0;
  int64_t training_samples = 0;
  double initial_loss = 0.0;
  double final_loss = 0.0;
  double reinforced = 0.0;  // final-steps mean entropy with the trained policy
  double uniform = 0.0;     // same with uniform probabilities
};

// Rewards from one exploration of the world that applies every
// transformation to each hallucinated query, judged until `collect_queries`
// queries are spent. The gamma criterion is disabled.
std::vector<PolicySample> CollectPolicySamples(const SyntheticWorld& world, std::string_view domain,
                                               const IFSPConfig& explore, int collect_queries,
                                               uint64_t seed);

// Per run: explore with every transformation applied to each hallucinated
// query to collect rewards, train a value network on them, then explore
// once guided by the network and once with uniform probabilities.
std::vector<ConvergenceRun> RunConvergence(const SyntheticWorld& world,
                                           const ConvergenceSettings& settings,
                                           int parallel_runs = 1);
std::string ConvergenceRunsToJson(std::span<const ConvergenceRun> runs);

}  // namespace halmit

#endif  // HALMIT_EVAL_HARNESS_H_
