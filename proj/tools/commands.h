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

// Command bodies of the halmit binary. Each returns the process exit code
// and writes its human-readable output to `out` and diagnostics to `err`.

#ifndef HALMIT_TOOLS_COMMANDS_H_
#define HALMIT_TOOLS_COMMANDS_H_

#include <cstdint>
#include <filesystem>
#include <iosfwd>
#include <memory>
#include <optional>
#include <string>

#include "halmit/chat.h"
#include "halmit/config.h"
#include "halmit/embedding.h"
#include "halmit/semantic_entropy.h"
#include "halmit/synthetic_world.h"

namespace halmit::cli {

inline constexpr int kExitOk = 0;
inline constexpr int kExitError = 1;
inline constexpr int kExitBudget = 2;

struct CommandOptions {
  std::filesystem::path config;
  std::optional<uint64_t> seed;
  std::optional<std::string> domain;
};

// Loads the config and applies the command-line overrides: --seed replaces
// explore.seed, policy.rng_seed and benchmark.seed; --domain the domain.
Config LoadRunConfig(const CommandOptions& options);

// Backends, oracle and embedder described by a config.
struct Runtime {
  std::unique_ptr<SyntheticWorld> world;  // when gateway.world is set
  std::unique_ptr<Embedder> owned_embedder;
  const Embedder* embedder = nullptr;
  std::unique_ptr<ChatBackend> target;
  std::unique_ptr<ChatBackend> generator;
  std::unique_ptr<ChatBackend> judge;
  std::unique_ptr<EquivalenceOracle> oracle;
};
Runtime BuildRuntime(const Config& config);

int CmdExplore(const CommandOptions& options, std::ostream& out, std::ostream& err);
int CmdTrainPolicy(const CommandOptions& options, std::ostream& out, std::ostream& err);
int CmdCheck(const CommandOptions& options, const std::string& query, std::ostream& out,
             std::ostream& err);
int CmdServe(const CommandOptions& options, std::ostream& out, std::ostream& err);
int CmdBenchmark(const CommandOptions& options, std::ostream& out, std::ostream& err);
int CmdSweep(const CommandOptions& options, std::ostream& out, std::ostream& err);
int CmdConvergence(const CommandOptions& options, std::ostream& out, std::ostream& err);
// Scores a labeled dataset against the store, labeling with the target's
// answers and the GQA rule.
int CmdEvaluate(const CommandOptions& options, const std::filesystem::path& dataset,
                const std::string& format, std::ostream& out, std::ostream& err);

}  // namespace halmit::cli

#endif  // HALMIT_TOOLS_COMMANDS_H_
