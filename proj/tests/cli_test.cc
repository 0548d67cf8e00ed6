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

#include <filesystem>
#include <fstream>
#include <future>
#include <sstream>
#include <string>
#include <thread>
#include <vector>

#include <gtest/gtest.h>

#include "commands.h"
#include "halmit/vector_store.h"
#include "httplib.h"
#include "json.hpp"
#include "service.h"
#include "test_util.h"

namespace halmit::cli {
namespace {

using nlohmann::json;
using testing::AssetDir;
using testing::TempDir;

constexpr char kFranceQuery[] = "What is the capital of France?";

std::string ReadFile(const std::filesystem::path& p) {
  std::ifstream in(p, std::ios::binary);
  std::ostringstream s;
  s << in.rdbuf();
  return s.str();
}

// Copies the scripted fixture into dir with the given top-level overrides.
std::filesystem::path WriteConfig(const TempDir& dir, const json& patch = json::object()) {
  json c = json::parse(ReadFile(AssetDir() / "fixtures" / "scripted_config.json"));
  c.merge_patch(patch);
  const auto path = dir / "config.json";
  std::ofstream(path) << c.dump(2);
  return path;
}

struct CommandRun {
  int code;
  std::string out;
  std::string err;
};

template <typename F>
CommandRun Capture(F&& f) {
  std::ostringstream out;
  std::ostringstream err;
  const int code = f(out, err);
  return {code, out.str(), err.str()};
}

CommandRun Explore(const CommandOptions& o) {
  return Capture([&](std::ostream& out, std::ostream& err) { return CmdExplore(o, out, err); });
}

CommandRun TrainPolicy(const CommandOptions& o) {
  return Capture([&](std::ostream& out, std::ostream& err) { return CmdTrainPolicy(o, out, err); });
}

CommandRun Check(const CommandOptions& o, const std::string& q) {
  return Capture([&](std::ostream& out, std::ostream& err) { return CmdCheck(o, q, out, err); });
}

// Runs to the iteration cap so every round expands and logs rewards.
const json kFullRun = {{"explore", {{"gamma_stop", 1.0}}}};

TEST(CliTest, ExploreStopsOnGamma) {
  TempDir dir;
  const CommandRun r = Explore({WriteConfig(dir)});
  EXPECT_EQ(r.code, kExitOk) << r.err;
  EXPECT_NE(r.out.find("stopped by gamma"), std::string::npos) << r.out;
  EXPECT_TRUE(std::filesystem::exists(dir / "out" / "boundary.store"));
  EXPECT_TRUE(std::filesystem::exists(dir / "out" / "events.jsonl"));
  const json report = json::parse(ReadFile(dir / "out" / "report.json"));
  EXPECT_EQ(report["boundary_count"], 3);
}

TEST(CliTest, ExploreBudgetExitCode) {
  TempDir dir;
  const CommandRun r = Explore({WriteConfig(dir, kFullRun)});
  EXPECT_EQ(r.code, kExitBudget) << r.err;
  EXPECT_NE(r.out.find("max_iterations"), std::string::npos) << r.out;
}

TEST(CliTest, ErrorsExitOne) {
  TempDir dir;
  const CommandRun missing = Explore({dir / "nope.json"});
  EXPECT_EQ(missing.code, kExitError);
  EXPECT_FALSE(missing.err.empty());
  std::ofstream(dir / "bad.json") << R"({"explore": {"gama": 1}})";
  EXPECT_EQ(Explore({dir / "bad.json"}).code, kExitError);
  const CommandRun no_store = Check({WriteConfig(dir)}, kFranceQuery);
  EXPECT_EQ(no_store.code, kExitError);
  EXPECT_NE(no_store.err.find("explore"), std::string::npos);
}

TEST(CliTest, TrainPolicyIsReproducible) {
  TempDir dir;
  const auto config = WriteConfig(dir, kFullRun);
  ASSERT_EQ(Explore({config}).code, kExitBudget);
  const CommandRun first = TrainPolicy({config});
  ASSERT_EQ(first.code, kExitOk) << first.err;
  const std::string ckpt = ReadFile(dir / "out" / "policy.ckpt");
  EXPECT_FALSE(ckpt.empty());
  EXPECT_TRUE(std::filesystem::exists(dir / "out" / "loss_curve.txt"));
  ASSERT_EQ(TrainPolicy({config}).code, kExitOk);
  EXPECT_EQ(ReadFile(dir / "out" / "policy.ckpt"), ckpt);
}

TEST(CliTest, TrainPolicyNeedsABatch) {
  TempDir dir;
  const auto config = WriteConfig(dir, {{"explore", {{"gamma_stop", 1.0}}}, {"policy", {{"batch_size", 100000}}}});
  ASSERT_EQ(Explore({config}).code, kExitBudget);
  const CommandRun r = TrainPolicy({config});
  EXPECT_EQ(r.code, kExitError);
  EXPECT_FALSE(r.err.empty());
}

TEST(CliTest, ExploreIsSeededAndOverridable) {
  TempDir a;
  TempDir b;
  ASSERT_EQ(Explore({WriteConfig(a, kFullRun)}).code, kExitBudget);
  ASSERT_EQ(Explore({WriteConfig(b, kFullRun)}).code, kExitBudget);
  EXPECT_EQ(ReadFile(a / "out" / "boundary.store"), ReadFile(b / "out" / "boundary.store"));
  EXPECT_EQ(ReadFile(a / "out" / "events.jsonl"), ReadFile(b / "out" / "events.jsonl"));

  CommandOptions o{WriteConfig(b, kFullRun)};
  o.domain = "atlantis";
  ASSERT_EQ(Explore(o).code, kExitBudget);
  const json report = json::parse(ReadFile(b / "out" / "report.json"));
  EXPECT_EQ(report["domain"], "atlantis");
  // The seed names the generator's variant stream, which has no script.
  o.seed = 9;
  const CommandRun reseeded = Explore(o);
  EXPECT_EQ(reseeded.code, kExitError);
  EXPECT_NE(reseeded.err.find("script_missing"), std::string::npos) << reseeded.err;
}

TEST(CliTest, CheckIsDeterministic) {
  TempDir dir;
  const auto config = WriteConfig(dir);
  ASSERT_EQ(Explore({config}).code, kExitOk);
  const CommandRun a = Check({config}, kFranceQuery);
  const CommandRun b = Check({config}, kFranceQuery);
  ASSERT_EQ(a.code, kExitOk) << a.err;
  EXPECT_EQ(a.out, b.out);
  const json v = json::parse(a.out);
  EXPECT_EQ(v["reason"], "within_bound");
  EXPECT_EQ(v["flagged"], false);
  EXPECT_EQ(v["query_entropy"], 0.0);
}

class ServiceTest : public ::testing::Test {
 protected:
  void SetUp() override {
    config_path_ = WriteConfig(dir_);
    ASSERT_EQ(Explore({config_path_}).code, kExitOk);
  }

  std::unique_ptr<Service> Make(bool with_store) {
    Config c = LoadRunConfig({config_path_});
    Runtime rt = BuildRuntime(c);
    std::optional<VectorStore> store;
    if (with_store) store = VectorStore::Load(c.Resolve(c.paths.store));
    return std::make_unique<Service>(std::move(c), std::move(rt), std::move(store));
  }

  TempDir dir_;
  std::filesystem::path config_path_;
};

TEST_F(ServiceTest, NoStoreAnswers503) {
  auto s = Make(false);
  EXPECT_EQ(s->Check(R"({"query": "q"})").status, 503);
  EXPECT_EQ(json::parse(s->Health().body)["status"], "no_store");
}

TEST_F(ServiceTest, RejectsBadRequests) {
  auto s = Make(true);
  EXPECT_EQ(s->Check("{not json").status, 400);
  EXPECT_EQ(s->Check(R"({"query": "q", "extra": 1})").status, 400);
  EXPECT_EQ(s->Check(R"({"query": ""})").status, 400);
  EXPECT_EQ(s->Check(R"(["query"])").status, 400);
}

TEST_F(ServiceTest, BodyMatchesCli) {
  auto s = Make(true);
  const CommandRun cli = Check({config_path_}, kFranceQuery);
  const HttpReply reply = s->Check(json{{"query", kFranceQuery}}.dump());
  EXPECT_EQ(reply.status, 200);
  EXPECT_EQ(reply.body, cli.out);
  const json health = json::parse(s->Health().body);
  EXPECT_EQ(health["store_records"], 3);
  EXPECT_EQ(json::parse(s->Boundary(std::nullopt).body)["count"], 3);
  EXPECT_EQ(json::parse(s->Boundary("elsewhere").body)["count"], 0);
}

TEST_F(ServiceTest, ConcurrentHttpChecksMatchSequential) {
  auto s = Make(true);
  const std::vector<std::string> queries = {kFranceQuery, "Which city hosts the lost library of Atlantis?",
                                            "Where is the capital of the hollow earth?"};
  std::vector<std::string> expected;
  for (const auto& q : queries) expected.push_back(s->Check(json{{"query", q}}.dump()).body);

  const int port = s->BindToAnyPort("127.0.0.1");
  ASSERT_GT(port, 0);
  std::thread server([&] { s->ListenAfterBind(); });
  std::vector<std::future<std::pair<int, std::string>>> replies;
  for (int i = 0; i < 50; ++i) {
    replies.push_back(std::async(std::launch::async, [&, i] {
      httplib::Client client("127.0.0.1", port);
      const auto res = client.Post("/v1/check", json{{"query", queries[i % queries.size()]}}.dump(),
                                   "application/json");
      return res ? std::make_pair(res->status, res->body)
                 : std::make_pair(-1, httplib::to_string(res.error()));
    }));
  }
  for (int i = 0; i < 50; ++i) {
    const auto [status, body] = replies[i].get();
    EXPECT_EQ(status, 200);
    EXPECT_EQ(body, expected[i % queries.size()]);
  }
  httplib::Client client("127.0.0.1", port);
  const auto health = client.Get("/v1/health");
  ASSERT_TRUE(health);
  EXPECT_EQ(json::parse(health->body)["store_records"], 3);
  s->Stop();
  server.join();
}

}  // namespace
}  // namespace halmit::cli
