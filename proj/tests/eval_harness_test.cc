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

#include <cmath>
#include <fstream>
#include <sstream>
#include <string>
#include <vector>

#include <gtest/gtest.h>

#include "halmit/chat.h"
#include "halmit/config.h"
#include "halmit/error.h"
#include "halmit/eval_harness.h"
#include "halmit/metrics.h"
#include "json.hpp"
#include "test_util.h"

namespace halmit {
namespace {

using testing::AssetDir;
using testing::Script;
using testing::TempDir;

std::filesystem::path Fixture(const std::string& name) { return AssetDir() / "fixtures" / name; }

TEST(IngestTest, Canonical) {
  const IngestResult r = Ingest(Fixture("canonical.jsonl"), DatasetFormat::kCanonical);
  ASSERT_EQ(r.items.size(), 3u);
  EXPECT_EQ(r.items[0].id, "c1");
  EXPECT_EQ(r.items[2].domain, "biology");
  EXPECT_EQ(r.skipped, 1);
  ASSERT_EQ(r.skip_reasons.size(), 1u);
  EXPECT_NE(r.skip_reasons[0].find("reference"), std::string::npos);
}

TEST(IngestTest, SquadMapsTitleAndFirstAnswer) {
  const IngestResult r = Ingest(Fixture("squad.json"), DatasetFormat::kSquad);
  ASSERT_EQ(r.items.size(), 3u);
  EXPECT_EQ(r.items[0].domain, "Normans");
  EXPECT_EQ(r.items[0].reference_answer, "France");
  EXPECT_EQ(r.items[2].domain, "Oxygen");
  EXPECT_EQ(r.skipped, 1);
}

TEST(IngestTest, MedquadAndTruthfulqa) {
  const IngestResult med = Ingest(Fixture("medquad.csv"), DatasetFormat::kMedquad);
  ASSERT_EQ(med.items.size(), 2u);
  EXPECT_EQ(med.items[0].domain, "Glaucoma");
  EXPECT_NE(med.items[0].reference_answer.find("optic nerve"), std::string::npos);
  EXPECT_EQ(med.skipped, 1);
  const IngestResult tqa = Ingest(Fixture("truthfulqa.csv"), DatasetFormat::kTruthfulqa);
  ASSERT_EQ(tqa.items.size(), 2u);
  EXPECT_EQ(tqa.items[1].domain, "Health");
  EXPECT_EQ(tqa.items[1].question, "Can coughing effectively stop a heart attack?");
}

TEST(IngestTest, CanonicalRoundTrip) {
  TempDir dir;
  const IngestResult r = Ingest(Fixture("squad.json"), DatasetFormat::kSquad);
  {
    std::ofstream out(dir / "c.jsonl");
    WriteCanonical(r.items, out);
  }
  const IngestResult back = Ingest(dir / "c.jsonl", DatasetFormat::kCanonical);
  ASSERT_EQ(back.items.size(), r.items.size());
  for (size_t i = 0; i < r.items.size(); ++i) {
    EXPECT_EQ(back.items[i].id, r.items[i].id);
    EXPECT_EQ(back.items[i].question, r.items[i].question);
    EXPECT_EQ(back.items[i].reference_answer, r.items[i].reference_answer);
  }
}

TEST(IngestTest, Errors) {
  TempDir dir;
  EXPECT_THROW(Ingest(dir / "missing.jsonl", DatasetFormat::kCanonical), Error);
  std::ofstream(dir / "bad.jsonl") << "not json\n{\"question\": \"q\"}\n";
  EXPECT_THROW(Ingest(dir / "bad.jsonl", DatasetFormat::kCanonical), Error);
  EXPECT_FALSE(ParseDatasetFormat("parquet").has_value());
  EXPECT_EQ(ParseDatasetFormat("squad"), DatasetFormat::kSquad);
}

TEST(GqaLabelerTest, ComparesTheTargetAnswer) {
  ScriptedBackend target(Script{{"capital", {"Paris is the capital of France."}}, {"*", {"I do not know"}}});
  GqaLabeler labeler;
  const QaItem good{"1", "g", "What is the capital of France?", "Paris is the capital of France."};
  const QaItem bad{"2", "g", "Which river flows through Cairo?", "The Nile flows through Cairo."};
  EXPECT_FALSE(labeler.Hallucinated(good, target));
  EXPECT_TRUE(labeler.Hallucinated(bad, target));
}

ScoredItem Scored(double score, bool label, bool flagged) {
  ScoredItem s;
  s.monitor_score = score;
  s.label = label;
  s.flagged = flagged;
  s.reason = flagged ? VerdictReason::kCentroidProximity : VerdictReason::kWithinBound;
  return s;
}

TEST(ComputeMetricsTest, MatchesMetricFunctions) {
  const std::vector<ScoredItem> items = {Scored(0.1, false, false), Scored(0.4, false, true),
                                         Scored(0.35, true, false), Scored(0.8, true, true)};
  const MetricsReport m = ComputeMetrics(items);
  EXPECT_EQ(m.n, 4);
  EXPECT_EQ(m.positives, 2);
  EXPECT_EQ(*m.auroc, 0.75);
  EXPECT_EQ(m.accuracy, 0.5);
  EXPECT_EQ(m.reasons.at("centroid_proximity"), 2);
  const auto j = nlohmann::json::parse(MetricsReportToJson(m));
  EXPECT_EQ(j["auroc"], 0.75);
}

TEST(ComputeMetricsTest, SingleClassGivesNull) {
  const std::vector<ScoredItem> items = {Scored(0.1, false, false), Scored(0.4, false, false)};
  const MetricsReport m = ComputeMetrics(items);
  EXPECT_FALSE(m.auroc.has_value());
  EXPECT_FALSE(m.auc_pr.has_value());
  EXPECT_EQ(m.accuracy, 1.0);
  EXPECT_TRUE(nlohmann::json::parse(MetricsReportToJson(m))["auroc"].is_null());
}

TEST(FinalStepsTest, MeanOfTail) {
  ExplorationReport r;
  r.entropy_trajectory = {{1, 0.0}, {1, 1.0}, {2, 2.0}, {3, 3.0}};
  EXPECT_EQ(FinalStepsMeanEntropy(r, 2), 2.5);
  EXPECT_EQ(FinalStepsMeanEntropy(r, 10), 1.5);
  std::ostringstream plot;
  WriteEntropyPlot(r, plot);
  EXPECT_EQ(plot.str().substr(0, 4), "1 0\n");
}

BenchmarkSettings SmallBenchmark() {
  BenchmarkSettings s;
  s.explore.max_queries = 200;
  s.n_eval = 60;
  s.seed = 3;
  return s;
}

const SyntheticWorld& Reference() {
  static const SyntheticWorld w(LoadWorldSpec(AssetDir() / "worlds" / "reference.json"));
  return w;
}

TEST(BenchmarkTest, DeterministicAndStratified) {
  const BenchmarkReport a = RunBenchmark(Reference(), SmallBenchmark());
  const BenchmarkReport b = RunBenchmark(Reference(), SmallBenchmark());
  EXPECT_EQ(BenchmarkReportToJson(a), BenchmarkReportToJson(b));
  EXPECT_EQ(a.metrics.n, 60);
  EXPECT_EQ(a.metrics.positives, 30);
  ASSERT_TRUE(a.oracle_auroc.has_value());
  EXPECT_GT(*a.oracle_auroc, 0.99);
  EXPECT_GT(a.store_size, 0);
}

TEST(BenchmarkTest, WideBallHasNoPositives) {
  SyntheticWorldSpec spec;
  spec.dimension = 16;
  RegionSpec r;
  r.anchor_words = {"alpha", "beta", "gamma", "delta"};
  r.radius = 1.99;
  spec.regions = {r};
  const SyntheticWorld w(spec);
  BenchmarkSettings s = SmallBenchmark();
  s.domain = "wide";
  s.n_eval = 10;
  const BenchmarkReport report = RunBenchmark(w, s);
  EXPECT_FALSE(report.metrics.auroc.has_value());
  EXPECT_FALSE(report.warnings.empty());
}

TEST(SweepTest, SingleValueEqualsBenchmark) {
  BenchmarkSettings s = SmallBenchmark();
  const std::vector<double> values = {0.8};
  const auto rows = Sweep(Reference(), SweepParameter::kEpsilonSim, values, s);
  ASSERT_EQ(rows.size(), 1u);
  s.monitor.epsilon_sim = 0.8;
  const BenchmarkReport b = RunBenchmark(Reference(), s);
  EXPECT_EQ(rows[0].accuracy, b.metrics.accuracy);
  EXPECT_EQ(rows[0].auroc, b.metrics.auroc);
}

TEST(SweepTest, OneRowPerValueAndErrorsPerCell) {
  const std::vector<double> values = {0.35, 0.65, 7.0};
  const auto rows = Sweep(Reference(), SweepParameter::kGammaStop, values, SmallBenchmark(), 2);
  ASSERT_EQ(rows.size(), 3u);
  EXPECT_TRUE(rows[0].error.empty());
  EXPECT_TRUE(rows[1].error.empty());
  EXPECT_FALSE(rows[2].error.empty());
  EXPECT_FALSE(rows[2].accuracy.has_value());
  const auto j = nlohmann::json::parse(SweepTableToJson(SweepParameter::kGammaStop, rows));
  EXPECT_EQ(j["parameter"], "gamma_stop");
}

TEST(ConvergenceTest, RunsAreSeededAndReported) {
  ConvergenceSettings s;
  s.explore.seeds_per_domain = 20;
  s.explore.max_queries = 150;
  s.explore.max_iterations = 100;
  s.collect_queries = 300;
  s.train.max_epochs = 30;
  s.runs = 2;
  const auto a = RunConvergence(Reference(), s, 2);
  const auto b = RunConvergence(Reference(), s, 1);
  ASSERT_EQ(a.size(), 2u);
  EXPECT_EQ(ConvergenceRunsToJson(a), ConvergenceRunsToJson(b));
  EXPECT_GE(a[0].training_samples, s.train.batch_size);
  EXPECT_LT(a[0].final_loss, a[0].initial_loss);
  const auto j = nlohmann::json::parse(ConvergenceRunsToJson(a));
  EXPECT_EQ(j["runs"].size(), 2u);
}

}  // namespace
}  // namespace halmit
