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

#include <atomic>
#include <string>
#include <thread>
#include <vector>

#include <gtest/gtest.h>

#include "halmit/chat.h"
#include "halmit/embedding.h"
#include "halmit/error.h"
#include "httplib.h"
#include "json.hpp"
#include "test_util.h"

namespace halmit {
namespace {

using testing::Script;

using nlohmann::json;

std::vector<ChatTurn> User(const std::string& text) { return {{Role::kUser, text}}; }

TEST(ValidateTurnsTest, AcceptsAlternatingTurns) {
  const std::vector<ChatTurn> turns = {
      {Role::kSystem, "be brief"}, {Role::kUser, "q1"}, {Role::kAssistant, "a1"}, {Role::kUser, "q2"}};
  EXPECT_NO_THROW(ValidateTurns(turns));
}

TEST(ValidateTurnsTest, RejectsMalformedTurns) {
  EXPECT_THROW(ValidateTurns({}), Error);
  EXPECT_THROW(ValidateTurns(std::vector<ChatTurn>{{Role::kSystem, "s"}}), Error);
  EXPECT_THROW(ValidateTurns(std::vector<ChatTurn>{{Role::kUser, ""}}), Error);
  EXPECT_THROW(ValidateTurns(std::vector<ChatTurn>{{Role::kAssistant, "a"}, {Role::kUser, "q"}}), Error);
  EXPECT_THROW(ValidateTurns(std::vector<ChatTurn>{{Role::kUser, "q"}, {Role::kAssistant, "a"}}), Error);
  EXPECT_THROW(ValidateTurns(std::vector<ChatTurn>{{Role::kUser, "q"}, {Role::kUser, "q"}}), Error);
}

TEST(ScriptedBackendTest, EchoesMapping) {
  ScriptedBackend b(Script{{"Q1", {"A1"}}});
  EXPECT_EQ(b.Complete(User("Q1")), "A1");
}

TEST(ScriptedBackendTest, ConstantBackendSamplesIdentically) {
  ScriptedBackend b(Script{{"*", {"same"}}});
  EXPECT_EQ(SampleK(b, "anything", 4), std::vector<std::string>(4, "same"));
}

TEST(ScriptedBackendTest, LongestContainedKeyWins) {
  ScriptedBackend b(Script{{"Task", {"short"}}, {"Task: seed", {"long"}}, {"*", {"fallback"}}});
  EXPECT_EQ(b.Complete(User("Task: seed\nDomain: x")), "long");
  EXPECT_EQ(b.Complete(User("Task: judge")), "short");
  EXPECT_EQ(b.Complete(User("other")), "fallback");
}

TEST(ScriptedBackendTest, RepliesCycleBySampleIndex) {
  ScriptedBackend b(Script{{"q", {"a", "b", "c"}}});
  EXPECT_EQ(SampleK(b, "q", 5), (std::vector<std::string>{"a", "b", "c", "a", "b"}));
}

TEST(ScriptedBackendTest, MissingKeyIsAnError) {
  ScriptedBackend b(Script{{"q", {"a"}}});
  try {
    b.Complete(User("unknown"));
    FAIL();
  } catch (const Error& e) {
    EXPECT_EQ(e.code(), ErrorCode::kScriptMissing);
  }
  EXPECT_THROW(ScriptedBackend(Script{{"q", {}}}), Error);
}

TEST(SampleKTest, NeedsTwoSamples) {
  ScriptedBackend b(Script{{"*", {"x"}}});
  EXPECT_THROW(SampleK(b, "q", 1), Error);
}

TEST(MakeBackendTest, KindDispatch) {
  BackendSpec spec;
  spec.kind = BackendKind::kScripted;
  spec.script = {{"*", {"ok"}}};
  EXPECT_EQ(MakeBackend(spec)->Complete(User("q")), "ok");
  spec.kind = BackendKind::kRemote;
  EXPECT_THROW(MakeBackend(spec), Error);
  spec.kind = BackendKind::kSynthetic;
  EXPECT_THROW(MakeBackend(spec), Error);
}

// OpenAI-compatible endpoint on a free local port.
class MockServer {
 public:
  MockServer() {
    port_ = server_.bind_to_any_port("127.0.0.1");
    thread_ = std::thread([this] { server_.listen_after_bind(); });
    server_.wait_until_ready();
  }
  ~MockServer() {
    server_.stop();
    thread_.join();
  }
  httplib::Server& server() { return server_; }
  std::string endpoint() const { return "http://127.0.0.1:" + std::to_string(port_) + "/v1"; }

 private:
  httplib::Server server_;
  int port_ = 0;
  std::thread thread_;
};

BackendSpec RemoteSpec(const std::string& endpoint) {
  BackendSpec spec;
  spec.kind = BackendKind::kRemote;
  spec.endpoint = endpoint;
  spec.model_name = "mock-model";
  spec.temperature = 0.7;
  spec.max_tokens = 32;
  spec.seed = 11;
  spec.retry_attempts = 3;
  spec.retry_backoff_ms = 1;
  return spec;
}

TEST(RemoteChatBackendTest, SendsWireFormatAndReadsChoices) {
  MockServer mock;
  json seen;
  mock.server().Post("/v1/chat/completions", [&](const httplib::Request& req, httplib::Response& res) {
    seen = json::parse(req.body);
    json choices = json::array();
    for (int i = 0; i < seen["n"].get<int>(); ++i) {
      choices.push_back({{"message", {{"role", "assistant"}, {"content", "reply " + std::to_string(i)}}}});
    }
    res.set_content(json{{"choices", choices}}.dump(), "application/json");
  });
  RemoteChatBackend b(RemoteSpec(mock.endpoint()));
  const std::vector<ChatTurn> turns = {{Role::kSystem, "sys"}, {Role::kUser, "hello"}};
  EXPECT_EQ(b.CompleteMany(turns, 3), (std::vector<std::string>{"reply 0", "reply 1", "reply 2"}));
  EXPECT_EQ(seen["model"], "mock-model");
  EXPECT_EQ(seen["n"], 3);
  EXPECT_EQ(seen["max_tokens"], 32);
  EXPECT_EQ(seen["seed"], 11);
  EXPECT_DOUBLE_EQ(seen["temperature"].get<double>(), 0.7);
  EXPECT_EQ(seen["messages"][0]["role"], "system");
  EXPECT_EQ(seen["messages"][1]["content"], "hello");
  EXPECT_EQ(b.Complete(User("x")), "reply 0");
}

TEST(RemoteChatBackendTest, RetriesServerErrors) {
  MockServer mock;
  std::atomic<int> calls{0};
  mock.server().Post("/v1/chat/completions", [&](const httplib::Request&, httplib::Response& res) {
    if (calls++ < 2) {
      res.status = 503;
      return;
    }
    res.set_content(R"({"choices":[{"message":{"content":"finally"}}]})", "application/json");
  });
  RemoteChatBackend b(RemoteSpec(mock.endpoint()));
  EXPECT_EQ(b.Complete(User("q")), "finally");
  EXPECT_EQ(calls.load(), 3);
}

TEST(RemoteChatBackendTest, TransportErrorAfterRetries) {
  MockServer mock;
  std::atomic<int> calls{0};
  mock.server().Post("/v1/chat/completions", [&](const httplib::Request&, httplib::Response& res) {
    ++calls;
    res.status = 500;
  });
  RemoteChatBackend b(RemoteSpec(mock.endpoint()));
  try {
    b.Complete(User("q"));
    FAIL();
  } catch (const Error& e) {
    EXPECT_EQ(e.code(), ErrorCode::kTransport);
    EXPECT_TRUE(e.retryable());
  }
  EXPECT_EQ(calls.load(), 3);
}

TEST(RemoteChatBackendTest, ClientErrorsAreNotRetried) {
  MockServer mock;
  std::atomic<int> calls{0};
  mock.server().Post("/v1/chat/completions", [&](const httplib::Request&, httplib::Response& res) {
    ++calls;
    res.status = 400;
  });
  RemoteChatBackend b(RemoteSpec(mock.endpoint()));
  EXPECT_THROW(b.Complete(User("q")), Error);
  EXPECT_EQ(calls.load(), 1);
}

TEST(RemoteChatBackendTest, ShortBatchIsAnError) {
  MockServer mock;
  mock.server().Post("/v1/chat/completions", [&](const httplib::Request&, httplib::Response& res) {
    res.set_content(R"({"choices":[{"message":{"content":"one"}}]})", "application/json");
  });
  RemoteChatBackend b(RemoteSpec(mock.endpoint()));
  EXPECT_THROW(SampleK(b, "q", 3), Error);
}

TEST(RemoteChatBackendTest, MalformedReplyIsUnparseable) {
  MockServer mock;
  mock.server().Post("/v1/chat/completions", [&](const httplib::Request&, httplib::Response& res) {
    res.set_content(R"({"nothing":1})", "application/json");
  });
  RemoteChatBackend b(RemoteSpec(mock.endpoint()));
  try {
    b.Complete(User("q"));
    FAIL();
  } catch (const Error& e) {
    EXPECT_EQ(e.code(), ErrorCode::kUnparseable);
  }
}

TEST(RemoteChatBackendTest, UnreachableHostIsTransportError) {
  // Nothing listens on a privileged port in the test environment.
  BackendSpec spec = RemoteSpec("http://127.0.0.1:1/v1");
  spec.retry_attempts = 2;
  RemoteChatBackend b(spec);
  try {
    b.Complete(User("q"));
    FAIL();
  } catch (const Error& e) {
    EXPECT_EQ(e.code(), ErrorCode::kTransport);
  }
}

TEST(RemoteEmbedderTest, ReadsAndNormalizesEmbedding) {
  MockServer mock;
  json seen;
  mock.server().Post("/v1/embeddings", [&](const httplib::Request& req, httplib::Response& res) {
    seen = json::parse(req.body);
    res.set_content(R"({"data":[{"embedding":[3.0, 4.0]}]})", "application/json");
  });
  EmbeddingSpec spec;
  spec.kind = EmbeddingKind::kRemote;
  spec.dimension = 2;
  spec.endpoint = mock.endpoint();
  spec.model_name = "embedder";
  RemoteEmbedder e(spec);
  const Vector v = e.Embed("text");
  EXPECT_EQ(seen["model"], "embedder");
  EXPECT_EQ(seen["input"], "text");
  EXPECT_NEAR(v[0], 0.6, 1e-12);
  EXPECT_NEAR(v[1], 0.8, 1e-12);

  spec.dimension = 3;
  RemoteEmbedder wrong(spec);
  EXPECT_THROW(wrong.Embed("text"), Error);
}

}  // namespace
}  // namespace halmit
