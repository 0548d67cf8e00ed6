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

#include "commands.h"

#include <exception>
#include <fstream>
#include <iomanip>
#include <ostream>
#include <sstream>
#include <utility>
#include <vector>

#include "halmit/error.h"
#include "halmit/eval_harness.h"
#include "halmit/fractal_explorer.h"
#include "halmit/monitor.h"
#include "halmit/policy.h"
#include "halmit/vector_store.h"
#include "service.h"

namespace halmit::cli {
namespace {

void MakeParent(const std::filesystem::path& path) {
  if (path.has_parent_path()) std::filesystem::create_directories(path.parent_path());
}

void WriteText(const std::filesystem::path& path, const std::string& text) {
  MakeParent(path);
  std::ofstream out(path, std::ios::binary | std::ios::trunc);
  out << text;
  if (!out) throw Error(ErrorCode::kIo, "cannot write " + path.string());
}

std::ofstream OpenForWrite(const std::filesystem::path& path) {
  MakeParent(path);
  std::ofstream out(path, std::ios::binary | std::ios::trunc);
  if (!out) throw Error(ErrorCode::kIo, "cannot write " + path.string());
  return out;
}

const SyntheticWorld& RequireWorld(const Runtime& runtime) {
  if (!runtime.world) throw Error(ErrorCode::kConfig, "this command needs gateway.world");
  return *runtime.world;
}

std::optional<ValueNetwork> GuidingPolicy(const Config& config) {
  if (!config.policy.guide_exploration) return std::nullopt;
  return ValueNetwork::Load(config.Resolve(config.paths.checkpoint));
}

BenchmarkSettings BenchmarkFromConfig(const Config& c, const ValueNetwork* policy) {
  BenchmarkSettings s;
  s.domain = c.domain;
  s.explore = c.explore;
  s.monitor = c.monitor;
  s.oracle = c.gateway.oracle;
  s.n_eval = c.benchmark.n_eval;
  s.seed = c.benchmark.seed;
  s.workers = c.benchmark.workers;
  s.policy = policy;
  return s;
}

std::string OrNull(const std::optional<double>& x) {
  if (!x) return "null";
  std::ostringstream s;
  s << std::fixed << std::setprecision(4) << *x;
  return s.str();
}

// Runs a command body, turning exceptions into exit code 1.
template <typename Fn>
int Guarded(std::string_view command, std::ostream& err, Fn&& body) {
  try {
    return body();
  } catch (const std::exception& e) {
    err << "halmit " << command << ": " << e.what() << '\n';
    return kExitError;
  }
}

}  // namespace

Config LoadRunConfig(const CommandOptions& options) {
  Config c = LoadConfig(options.config);
  if (options.seed) {
    c.explore.seed = *options.seed;
    c.policy.train.rng_seed = *options.seed;
    c.benchmark.seed = *options.seed;
  }
  if (options.domain) c.domain = *options.domain;
  return c;
}

Runtime BuildRuntime(const Config& config) {
  Runtime rt;
  if (!config.gateway.world.empty()) {
    rt.world = std::make_unique<SyntheticWorld>(LoadWorldSpec(config.Resolve(config.gateway.world)));
    rt.embedder = &rt.world->embedder();
  } else {
    rt.owned_embedder = MakeEmbedder(config.gateway.embedding);
    rt.embedder = rt.owned_embedder.get();
  }
  rt.target = MakeBackend(config.gateway.target, rt.world.get());
  rt.generator = MakeBackend(config.gateway.generator, rt.world.get());
  rt.judge = MakeBackend(config.gateway.judge, rt.world.get());
  rt.oracle = MakeOracle(config.gateway.oracle, rt.judge.get());
  return rt;
}

int CmdExplore(const CommandOptions& options, std::ostream& out, std::ostream& err) {
  return Guarded("explore", err, [&] {
    const Config c = LoadRunConfig(options);
    Runtime rt = BuildRuntime(c);
    const auto policy = GuidingPolicy(c);
    VectorStore store(rt.embedder->dimension());
    const ExploreAgents agents{rt.target.get(), rt.generator.get(), rt.judge.get(), rt.oracle.get(),
                               rt.embedder};
    std::ofstream log = OpenForWrite(c.Resolve(c.paths.event_log));
    const ExplorationReport report =
        Explore(c.domain, agents, store, policy ? &*policy : nullptr, c.explore, &log);
    log.close();
    MakeParent(c.Resolve(c.paths.store));
    store.Save(c.Resolve(c.paths.store));
    WriteText(c.Resolve(c.paths.report), ReportToJson(report));
    std::ofstream plot = OpenForWrite(c.Resolve(c.paths.entropy_plot));
    WriteEntropyPlot(report, plot);

    const double gamma = report.gamma_trajectory.empty() ? 0.0 : report.gamma_trajectory.back();
    out << "domain " << c.domain << ": " << report.boundary_count << " boundary records, "
        << report.queries_judged << " queries in " << report.rounds << " rounds, gamma "
        << std::fixed << std::setprecision(4) << gamma << ", stopped by "
        << TerminationName(report.terminated_by) << '\n';
    return report.terminated_by == Termination::kGamma ? kExitOk : kExitBudget;
  });
}

int CmdTrainPolicy(const CommandOptions& options, std::ostream& out, std::ostream& err) {
  return Guarded("train-policy", err, [&] {
    const Config c = LoadRunConfig(options);
    const auto log_path = c.Resolve(c.paths.event_log);
    std::ifstream log(log_path);
    if (!log) throw Error(ErrorCode::kIo, "cannot read event log " + log_path.string());
    const std::vector<PolicySample> samples = ReadPolicySamples(log);
    const TrainResult result = Train(samples, c.policy.train);
    MakeParent(c.Resolve(c.paths.checkpoint));
    result.net.Save(c.Resolve(c.paths.checkpoint), c.policy.train.rng_seed,
                    static_cast<int>(result.loss_curve.size()));

    std::ostringstream curve;
    curve << std::setprecision(17) << 0 << ' ' << result.initial_loss << '\n';
    for (size_t e = 0; e < result.loss_curve.size(); ++e) {
      curve << e + 1 << ' ' << result.loss_curve[e] << '\n';
    }
    WriteText(c.Resolve(c.paths.loss_curve), curve.str());
    const double final_loss = result.loss_curve.empty() ? result.initial_loss : result.loss_curve.back();
    out << "trained on " << samples.size() << " samples for " << result.loss_curve.size()
        << " epochs: loss " << std::setprecision(6) << result.initial_loss << " -> " << final_loss << '\n';
    return kExitOk;
  });
}

int CmdCheck(const CommandOptions& options, const std::string& query, std::ostream& out,
             std::ostream& err) {
  return Guarded("check", err, [&] {
    const Config c = LoadRunConfig(options);
    const auto store_path = c.Resolve(c.paths.store);
    if (!std::filesystem::exists(store_path)) {
      throw Error(ErrorCode::kNotFound, "no boundary store at " + store_path.string() + "; run explore first");
    }
    Runtime rt = BuildRuntime(c);
    const VectorStore store = VectorStore::Load(store_path);
    const Monitor monitor(store, MonitorAgents{rt.embedder, rt.target.get(), rt.oracle.get()}, c.monitor);
    out << VerdictLine(monitor.Check(query, c.domain));
    return kExitOk;
  });
}

int CmdServe(const CommandOptions& options, std::ostream& out, std::ostream& err) {
  return Guarded("serve", err, [&] {
    Config c = LoadRunConfig(options);
    const auto store_path = c.Resolve(c.paths.store);
    std::optional<VectorStore> store;
    if (std::filesystem::exists(store_path)) {
      store = VectorStore::Load(store_path);
    } else {
      err << "halmit serve: no boundary store at " << store_path.string() << "; /v1/check answers 503\n";
    }
    const std::string host = c.service.host;
    const int port = c.service.port;
    Runtime rt = BuildRuntime(c);
    Service service(std::move(c), std::move(rt), std::move(store));
    out << "listening on " << host << ':' << port << std::endl;
    if (!service.Listen(host, port)) throw Error(ErrorCode::kIo, "cannot bind " + host + ":" + std::to_string(port));
    return kExitOk;
  });
}

int CmdBenchmark(const CommandOptions& options, std::ostream& out, std::ostream& err) {
  return Guarded("benchmark", err, [&] {
    const Config c = LoadRunConfig(options);
    Runtime rt = BuildRuntime(c);
    const auto policy = GuidingPolicy(c);
    const BenchmarkReport r = RunBenchmark(RequireWorld(rt), BenchmarkFromConfig(c, policy ? &*policy : nullptr));
    WriteText(c.Resolve(c.paths.report), BenchmarkReportToJson(r));
    out << "store " << r.store_size << " records, " << r.metrics.n << " queries: auroc "
        << OrNull(r.metrics.auroc) << ", auc_pr " << OrNull(r.metrics.auc_pr) << ", f1 "
        << OrNull(r.metrics.f1) << ", accuracy " << OrNull(r.metrics.accuracy) << ", oracle auroc "
        << OrNull(r.oracle_auroc) << '\n';
    for (const auto& w : r.warnings) err << "warning: " << w << '\n';
    return kExitOk;
  });
}

int CmdSweep(const CommandOptions& options, std::ostream& out, std::ostream& err) {
  return Guarded("sweep", err, [&] {
    const Config c = LoadRunConfig(options);
    Runtime rt = BuildRuntime(c);
    const auto policy = GuidingPolicy(c);
    const SweepParameter parameter = *ParseSweepParameter(c.sweep.parameter);
    const std::vector<SweepRow> rows = Sweep(RequireWorld(rt), parameter, c.sweep.values,
                                             BenchmarkFromConfig(c, policy ? &*policy : nullptr),
                                             c.benchmark.workers);
    WriteText(c.Resolve(c.paths.sweep), SweepTableToJson(parameter, rows));
    for (const auto& row : rows) {
      out << SweepParameterName(parameter) << ' ' << row.value << ": ";
      if (!row.error.empty()) {
        out << "error: " << row.error << '\n';
      } else {
        out << "accuracy " << OrNull(row.accuracy) << ", auroc " << OrNull(row.auroc) << '\n';
      }
    }
    return kExitOk;
  });
}

int CmdConvergence(const CommandOptions& options, std::ostream& out, std::ostream& err) {
  return Guarded("convergence", err, [&] {
    const Config c = LoadRunConfig(options);
    Runtime rt = BuildRuntime(c);
    ConvergenceSettings s;
    s.domain = c.domain;
    s.explore = c.explore;
    s.collect_queries = c.convergence.collect_queries;
    s.train = c.policy.train;
    s.runs = c.convergence.runs;
    s.final_steps = c.convergence.final_steps;
    s.seed = c.explore.seed;
    const std::vector<ConvergenceRun> runs = RunConvergence(RequireWorld(rt), s, c.benchmark.workers);
    WriteText(c.Resolve(c.paths.convergence), ConvergenceRunsToJson(runs));
    int wins = 0;
    for (const auto& r : runs) {
      out << "seed " << r.seed << ": reinforced " << OrNull(r.reinforced) << ", uniform "
          << OrNull(r.uniform) << '\n';
      if (r.reinforced > r.uniform) ++wins;
    }
    out << "reinforced higher in " << wins << " of " << runs.size() << " runs\n";
    return kExitOk;
  });
}

int CmdEvaluate(const CommandOptions& options, const std::filesystem::path& dataset,
                const std::string& format, std::ostream& out, std::ostream& err) {
  return Guarded("evaluate", err, [&] {
    const Config c = LoadRunConfig(options);
    const auto parsed = ParseDatasetFormat(format);
    if (!parsed) throw Error(ErrorCode::kInvalidArgument, "unknown dataset format '" + format + "'");
    const IngestResult data = Ingest(dataset, *parsed);
    for (const auto& reason : data.skip_reasons) err << "skipped: " << reason << '\n';
    const auto store_path = c.Resolve(c.paths.store);
    if (!std::filesystem::exists(store_path)) {
      throw Error(ErrorCode::kNotFound, "no boundary store at " + store_path.string());
    }
    Runtime rt = BuildRuntime(c);
    const VectorStore store = VectorStore::Load(store_path);
    const Monitor monitor(store, MonitorAgents{rt.embedder, rt.target.get(), rt.oracle.get()}, c.monitor);
    GqaLabeler labeler;
    const auto scored = ScoreItems(data.items, monitor, labeler, *rt.target, options.domain, c.benchmark.workers);
    const MetricsReport m = ComputeMetrics(scored);
    WriteText(c.Resolve(c.paths.report), MetricsReportToJson(m));
    out << m.n << " items (" << data.skipped << " skipped), " << m.positives << " hallucinated: auroc "
        << OrNull(m.auroc) << ", auc_pr " << OrNull(m.auc_pr) << ", f1 " << OrNull(m.f1) << ", accuracy "
        << OrNull(m.accuracy) << '\n';
    return kExitOk;
  });
}

}  // namespace halmit::cli
