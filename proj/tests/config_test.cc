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

#include <fstream>
#include <string>

#include <gtest/gtest.h>

#include "halmit/config.h"
#include "halmit/error.h"
#include "json.hpp"
#include "test_util.h"

namespace halmit {
namespace {

using testing::AssetDir;
using testing::TempDir;

TEST(ConfigTest, Defaults) {
  EXPECT_THROW(ParseConfig("{}"), Error);  // synthetic agents need a world
  const Config c = ParseConfig(R"({"gateway": {"world": "w.json"}})");
  EXPECT_EQ(c.explore.gamma_stop, 0.6);
  EXPECT_EQ(c.explore.samples_per_query, 5);
  EXPECT_EQ(c.explore.seeds_per_domain, 10);
  EXPECT_EQ(c.monitor.epsilon_sim, 0.8);
  EXPECT_EQ(c.policy.train.learning_rate, 1e-4);
  EXPECT_EQ(c.policy.train.batch_size, 64);
  EXPECT_EQ(c.policy.train.max_epochs, 300);
  EXPECT_EQ(c.sweep.values, (std::vector<double>{0.35, 0.45, 0.55, 0.65}));
  EXPECT_NO_THROW(c.Validate());
}

TEST(ConfigTest, RejectsUnknownKeysAndBadValues) {
  EXPECT_THROW(ParseConfig(R"({"explore": {"gama_stop": 0.5}})"), Error);
  EXPECT_THROW(ParseConfig(R"({"colour": 1})"), Error);
  EXPECT_THROW(ParseConfig(R"({"explore": {"gamma_stop": "high"}})"), Error);
  EXPECT_THROW(ParseConfig("[1, 2"), Error);
  EXPECT_THROW(ParseConfig(R"({"gateway": {"target": {"kind": "telepathy"}}})"), Error);
  EXPECT_THROW(ParseConfig(R"({"explore": {"gamma_stop": 0}})"), Error);
  EXPECT_THROW(ParseConfig(R"({"monitor": {"epsilon_sim": 1.5}})"), Error);
  EXPECT_THROW(ParseConfig(R"({"sweep": {"parameter": "omega"}})"), Error);
}

TEST(ConfigTest, SerializeParseIdentity) {
  Config c = ParseConfig(R"({
    "domain": "medicine",
    "gateway": {"world": "w.json"},
    "explore": {"gamma_stop": 0.45, "seeds_per_domain": 7, "probabilities": [0.5, 0.25, 0.25]},
    "monitor": {"epsilon_sim": 0.7, "k_retrieve": 4},
    "policy": {"learning_rate": 0.001, "batch_size": 8},
    "sweep": {"parameter": "epsilon_sim", "values": [0.6, 0.9]}
  })");
  const std::string once = SerializeConfig(c);
  const Config back = ParseConfig(once);
  EXPECT_EQ(SerializeConfig(back), once);
  EXPECT_EQ(back.domain, "medicine");
  EXPECT_EQ(back.explore.probabilities[0], 0.5);
  EXPECT_EQ(back.monitor.k_retrieve, 4);
  EXPECT_EQ(back.sweep.parameter, "epsilon_sim");
}

TEST(ConfigTest, ScriptedFixtureLoads) {
  const Config c = LoadConfig(AssetDir() / "fixtures" / "scripted_config.json");
  EXPECT_EQ(c.domain, "geography");
  EXPECT_EQ(c.gateway.target.kind, BackendKind::kScripted);
  EXPECT_EQ(c.gateway.judge.script.at("*").size(), 1u);
  EXPECT_EQ(c.explore.seeds_per_domain, 3);
}

TEST(ConfigTest, PathsResolveAgainstConfigDirectory) {
  TempDir dir;
  std::ofstream(dir / "run.json") << R"({"gateway": {"world": "w.json"}, "paths": {"store": "out/b.store", "report": "/abs/r.json"}})";
  const Config c = LoadConfig(dir / "run.json");
  EXPECT_EQ(c.Resolve(c.paths.store), dir / "out/b.store");
  EXPECT_EQ(c.Resolve(c.paths.report), std::filesystem::path("/abs/r.json"));
  EXPECT_THROW(LoadConfig(dir / "missing.json"), Error);
}

TEST(WorldSpecTest, RoundTrip) {
  const SyntheticWorldSpec spec = LoadWorldSpec(AssetDir() / "worlds" / "reference.json");
  const std::string once = SerializeWorldSpec(spec);
  EXPECT_EQ(SerializeWorldSpec(ParseWorldSpec(once)), once);
  EXPECT_THROW(ParseWorldSpec(R"({"dimension": 32, "regions": [], "extra": 1})"), Error);
}

}  // namespace
}  // namespace halmit
