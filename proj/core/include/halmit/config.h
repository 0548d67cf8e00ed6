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

// JSON run configuration. Every section is optional; absent keys keep their
// defaults and unknown keys are rejected.

#ifndef HALMIT_CONFIG_H_
#define HALMIT_CONFIG_H_

#include <cstdint>
#include <filesystem>
#include <string>
#include <string_view>
#include <vector>

#include "halmit/chat.h"
#include "halmit/embedding.h"
#include "halmit/fractal_explorer.h"
#include "halmit/monitor.h"
#include "halmit/policy.h"
#include "halmit/semantic_entropy.h"
#include "halmit/synthetic_world.h"

namespace halmit {

struct GatewayConfig {
  BackendSpec target;
  BackendSpec generator;
  BackendSpec judge;
  EmbeddingSpec embedding;
  EquivalenceOracleSpec oracle;
  // Synthetic world asset; required when a backend is synthetic. When set,
  // the world's embedder replaces the embedding section.
  std::string world;

  GatewayConfig();
};

struct PolicyConfig {
  TrainConfig train;
  // Use the checkpoint at paths.checkpoint for per-state probabilities
  // during exploration.
  bool guide_exploration = false;
};

struct PathsConfig {
  std::string store = "boundary.store";
  std::string checkpoint = "policy.ckpt";
  std::string event_log = "events.jsonl";
  std::string report = "report.json";
  std::string loss_curve = "loss_curve.txt";
  std::string entropy_plot = "entropy.txt";
  std::string sweep = "sweep.json";
  std::string convergence = "convergence.json";
};

struct BenchmarkConfig {
  int n_eval = 400;
  uint64_t seed = 0;
  int workers = 1;
};

struct SweepConfig {
  std::string parameter = "gamma_stop";  // or "epsilon_sim"
  std::vector<double> values = {0.35, 0.45, 0.55, 0.65};
};

struct ConvergenceConfig {
  int runs = 10;
  int final_steps = 30;
  int collect_queries = 1000;
};

struct ServiceConfig {
  std::string host = "127.0.0.1";
  int port = 8080;
  int max_in_flight = 8;
};

struct Config {
  std::string domain = "general";
  GatewayConfig gateway;
  IFSPConfig explore;
  PolicyConfig policy;
  MonitorConfig monitor;
  PathsConfig paths;
  BenchmarkConfig benchmark;
  SweepConfig sweep;
  ConvergenceConfig convergence;
  ServiceConfig service;
  // Directory relative paths are resolved against; not serialized.
  std::filesystem::path base_dir;

  std::filesystem::path Resolve(const std::string& path) const;
  // Throws kConfig.
  void Validate() const;
};

// Throws kConfig on malformed input or unknown keys.
Config ParseConfig(std::string_view json_text);
Config LoadConfig(const std::filesystem::path& path);
std::string SerializeConfig(const Config& config);

SyntheticWorldSpec ParseWorldSpec(std::string_view json_text);
SyntheticWorldSpec LoadWorldSpec(const std::filesystem::path& path);
std::string SerializeWorldSpec(const SyntheticWorldSpec& spec);

}  // namespace halmit

#endif  // HALMIT_CONFIG_H_
