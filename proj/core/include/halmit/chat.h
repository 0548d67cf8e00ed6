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

// Uniform access to every language-model role: the monitored agent, the
// query generator, the hallucination judge and the entailment judge.

#ifndef HALMIT_CHAT_H_
#define HALMIT_CHAT_H_

#include <cstdint>
#include <map>
#include <memory>
#include <optional>
#include <span>
#include <string>
#include <string_view>
#include <vector>

namespace halmit {

class SyntheticWorld;

enum class Role { kSystem, kUser, kAssistant };

std::string_view RoleName(Role role);

struct ChatTurn {
  Role role = Role::kUser;
  std::string content;
};

// Content must be non-empty; after an optional leading system turn the roles
// alternate user/assistant starting with user, and the last turn is a user
// turn. Throws kInvalidArgument otherwise.
void ValidateTurns(std::span<const ChatTurn> turns);

enum class BackendKind { kRemote, kScripted, kSynthetic };

struct BackendSpec {
  BackendKind kind = BackendKind::kScripted;
  std::string endpoint;  // remote only
  // Remote: the model name sent on the wire. Synthetic: the role played
  // against the world ("target", "generator" or "judge").
  std::string model_name;
  double temperature = 1.0;
  int max_tokens = 256;
  std::optional<uint64_t> seed;

  // Scripted replies keyed by prompt. A key matches when it equals the last
  // user turn, otherwise the longest key contained in it wins; "*" is the
  // fallback. A key with several replies answers sample i with reply i mod n.
  std::map<std::string, std::vector<std::string>> script;

  int retry_attempts = 3;
  int retry_backoff_ms = 500;
};

class ChatBackend {
 public:
  virtual ~ChatBackend() = default;

  // `sample_index` names the member of a batch of repeated samples (and the
  // attempt number on reprompts). Deterministic backends derive all of their
  // variation from it, which keeps them pure functions of their inputs.
  virtual std::string Complete(std::span<const ChatTurn> turns, int sample_index = 0) = 0;

  // n samples for the same turns; all-or-nothing.
  virtual std::vector<std::string> CompleteMany(std::span<const ChatTurn> turns, int n);
};

class ScriptedBackend : public ChatBackend {
 public:
  explicit ScriptedBackend(std::map<std::string, std::vector<std::string>> script);
  std::string Complete(std::span<const ChatTurn> turns, int sample_index = 0) override;

 private:
  std::map<std::string, std::vector<std::string>> script_;
};

// OpenAI-compatible chat completions.
class RemoteChatBackend : public ChatBackend {
 public:
  explicit RemoteChatBackend(BackendSpec spec);
  std::string Complete(std::span<const ChatTurn> turns, int sample_index = 0) override;
  std::vector<std::string> CompleteMany(std::span<const ChatTurn> turns, int n) override;

 private:
  BackendSpec spec_;
};

// `world` is required for synthetic backends and must outlive the backend.
std::unique_ptr<ChatBackend> MakeBackend(const BackendSpec& spec,
                                         const SyntheticWorld* world = nullptr);

// Sends `query` as a single user turn k times. Returns exactly k replies or
// throws.
std::vector<std::string> SampleK(ChatBackend& backend, std::string_view query, int k);

}  // namespace halmit

#endif  // HALMIT_CHAT_H_
