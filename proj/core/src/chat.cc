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

#include "halmit/chat.h"

#include "halmit/error.h"
#include "halmit/synthetic_world.h"
#include "halmit/text.h"
#include "http_json.h"

namespace halmit {

std::string_view RoleName(Role role) {
  switch (role) {
    case Role::kSystem: return "system";
    case Role::kUser: return "user";
    case Role::kAssistant: return "assistant";
  }
  return "user";
}

void ValidateTurns(std::span<const ChatTurn> turns) {
  if (turns.empty()) throw Error(ErrorCode::kInvalidArgument, "no chat turns");
  size_t i = 0;
  if (turns[0].role == Role::kSystem) ++i;
  if (i == turns.size()) throw Error(ErrorCode::kInvalidArgument, "system turn without a user turn");
  for (size_t k = 0; k < turns.size(); ++k) {
    if (turns[k].content.empty()) {
      throw Error(ErrorCode::kInvalidArgument, "turn " + std::to_string(k) + " is empty");
    }
  }
  for (Role expected = Role::kUser; i < turns.size(); ++i) {
    if (turns[i].role != expected) {
      throw Error(ErrorCode::kInvalidArgument,
                  "turn " + std::to_string(i) + " should be " + std::string(RoleName(expected)));
    }
    expected = expected == Role::kUser ? Role::kAssistant : Role::kUser;
  }
  if (turns.back().role != Role::kUser) {
    throw Error(ErrorCode::kInvalidArgument, "last turn must be a user turn");
  }
}

std::vector<std::string> ChatBackend::CompleteMany(std::span<const ChatTurn> turns, int n) {
  std::vector<std::string> out;
  out.reserve(static_cast<size_t>(n));
  for (int i = 0; i < n; ++i) out.push_back(Complete(turns, i));
  return out;
}

ScriptedBackend::ScriptedBackend(std::map<std::string, std::vector<std::string>> script)
    : script_(std::move(script)) {
  for (const auto& [key, replies] : script_) {
    if (replies.empty()) throw Error(ErrorCode::kConfig, "script key '" + key + "' has no replies");
  }
}

std::string ScriptedBackend::Complete(std::span<const ChatTurn> turns, int sample_index) {
  ValidateTurns(turns);
  const std::string& prompt = turns.back().content;
  const std::vector<std::string>* replies = nullptr;
  if (auto it = script_.find(prompt); it != script_.end()) {
    replies = &it->second;
  } else {
    size_t best = 0;
    for (const auto& [key, candidate] : script_) {
      if (key == "*" || key.size() <= best) continue;
      if (prompt.find(key) != std::string::npos) {
        best = key.size();
        replies = &candidate;
      }
    }
    if (replies == nullptr) {
      if (auto fallback = script_.find("*"); fallback != script_.end()) replies = &fallback->second;
    }
  }
  if (replies == nullptr) {
    throw Error(ErrorCode::kScriptMissing, "no scripted reply for prompt: " + prompt.substr(0, 120));
  }
  return (*replies)[static_cast<size_t>(sample_index) % replies->size()];
}

RemoteChatBackend::RemoteChatBackend(BackendSpec spec) : spec_(std::move(spec)) {}

std::string RemoteChatBackend::Complete(std::span<const ChatTurn> turns, int /*sample_index*/) {
  return CompleteMany(turns, 1).front();
}

std::vector<std::string> RemoteChatBackend::CompleteMany(std::span<const ChatTurn> turns, int n) {
  ValidateTurns(turns);
  nlohmann::json messages = nlohmann::json::array();
  for (const auto& turn : turns) {
    messages.push_back({{"role", RoleName(turn.role)}, {"content", turn.content}});
  }
  nlohmann::json body = {{"model", spec_.model_name},
                         {"messages", messages},
                         {"temperature", spec_.temperature},
                         {"max_tokens", spec_.max_tokens},
                         {"n", n}};
  if (spec_.seed) body["seed"] = *spec_.seed;
  auto reply = internal::PostJson(spec_.endpoint, "/chat/completions", body,
                                  {spec_.retry_attempts, spec_.retry_backoff_ms});
  std::vector<std::string> out;
  try {
    for (const auto& choice : reply.at("choices")) {
      out.push_back(choice.at("message").at("content").get<std::string>());
    }
  } catch (const nlohmann::json::exception& e) {
    throw Error(ErrorCode::kUnparseable, std::string("chat reply: ") + e.what());
  }
  if (static_cast<int>(out.size()) != n) {
    throw Error(ErrorCode::kTransport, "asked for " + std::to_string(n) + " choices, got " +
                                           std::to_string(out.size()));
  }
  for (const auto& text : out) {
    if (Trim(text).empty()) throw Error(ErrorCode::kUnparseable, "empty completion");
  }
  return out;
}

std::unique_ptr<ChatBackend> MakeBackend(const BackendSpec& spec, const SyntheticWorld* world) {
  switch (spec.kind) {
    case BackendKind::kScripted:
      return std::make_unique<ScriptedBackend>(spec.script);
    case BackendKind::kRemote:
      if (spec.endpoint.empty()) throw Error(ErrorCode::kConfig, "remote backend needs an endpoint");
      return std::make_unique<RemoteChatBackend>(spec);
    case BackendKind::kSynthetic:
      if (world == nullptr) throw Error(ErrorCode::kConfig, "synthetic backend needs a world");
      return MakeSyntheticBackend(*world, spec.model_name);
  }
  throw Error(ErrorCode::kConfig, "unknown backend kind");
}

std::vector<std::string> SampleK(ChatBackend& backend, std::string_view query, int k) {
  if (k < 2) throw Error(ErrorCode::kInvalidArgument, "sample_k needs K >= 2");
  const ChatTurn turn{Role::kUser, std::string(query)};
  auto samples = backend.CompleteMany(std::span<const ChatTurn>(&turn, 1), k);
  if (static_cast<int>(samples.size()) != k) {
    throw Error(ErrorCode::kTransport, "short sample batch");
  }
  return samples;
}

}  // namespace halmit
