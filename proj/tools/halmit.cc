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

// halmit explore|train-policy|check|serve|benchmark|sweep|convergence|evaluate
//        --config <path> [--seed N] [--domain D]

#include <cstdint>
#include <iostream>
#include <string>

#include "CLI11.hpp"
#include "commands.h"

namespace {

using halmit::cli::CommandOptions;

struct Flags {
  std::string config;
  uint64_t seed = 0;
  std::string domain;
};

void AddCommon(CLI::App* cmd, Flags& flags) {
  cmd->add_option("--config", flags.config, "Run configuration (JSON)")->required()->check(CLI::ExistingFile);
  cmd->add_option("--seed", flags.seed, "Overrides explore.seed, policy.rng_seed and benchmark.seed");
  cmd->add_option("--domain", flags.domain, "Overrides the configured domain");
}

CommandOptions ToOptions(const CLI::App* cmd, const Flags& flags) {
  CommandOptions o;
  o.config = flags.config;
  if (cmd->count("--seed") > 0) o.seed = flags.seed;
  if (cmd->count("--domain") > 0) o.domain = flags.domain;
  return o;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Black-box hallucination watchdog"};
  app.require_subcommand(1);
  Flags flags;

  auto* explore = app.add_subcommand("explore", "Map the agent's generalization bound into the store");
  auto* train = app.add_subcommand("train-policy", "Train the transformation policy from the event log");
  auto* check = app.add_subcommand("check", "Print the verdict for one query");
  auto* serve = app.add_subcommand("serve", "Serve the watchdog over HTTP");
  auto* benchmark = app.add_subcommand("benchmark", "Explore and score a synthetic world");
  auto* sweep = app.add_subcommand("sweep", "Benchmark once per value of one parameter");
  auto* convergence = app.add_subcommand("convergence", "Compare reinforced and uniform exploration");
  auto* evaluate = app.add_subcommand("evaluate", "Score a labeled dataset against the store");
  for (auto* cmd : {explore, train, check, serve, benchmark, sweep, convergence, evaluate}) {
    AddCommon(cmd, flags);
  }
  std::string query;
  check->add_option("query", query, "Query text")->required();
  std::string dataset;
  std::string format = "canonical";
  evaluate->add_option("--dataset", dataset, "Dataset file")->required()->check(CLI::ExistingFile);
  evaluate->add_option("--format", format, "canonical, medquad, squad or truthfulqa");

  CLI11_PARSE(app, argc, argv);

  using namespace halmit::cli;
  if (explore->parsed()) return CmdExplore(ToOptions(explore, flags), std::cout, std::cerr);
  if (train->parsed()) return CmdTrainPolicy(ToOptions(train, flags), std::cout, std::cerr);
  if (check->parsed()) return CmdCheck(ToOptions(check, flags), query, std::cout, std::cerr);
  if (serve->parsed()) return CmdServe(ToOptions(serve, flags), std::cout, std::cerr);
  if (benchmark->parsed()) return CmdBenchmark(ToOptions(benchmark, flags), std::cout, std::cerr);
  if (sweep->parsed()) return CmdSweep(ToOptions(sweep, flags), std::cout, std::cerr);
  if (convergence->parsed()) return CmdConvergence(ToOptions(convergence, flags), std::cout, std::cerr);
  return CmdEvaluate(ToOptions(evaluate, flags), dataset, format, std::cout, std::cerr);
}
