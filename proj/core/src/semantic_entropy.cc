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

#include "halmit/semantic_entropy.h"

#include <cmath>

#include "halmit/error.h"
#include "halmit/evaluator.h"
#include "halmit/prompts.h"
#include "halmit/text.h"

namespace halmit {

TokenOverlapOracle::TokenOverlapOracle(double threshold) : threshold_(threshold) {
  if (!(threshold > 0.0 && threshold <= 1.0)) {
    throw Error(ErrorCode::kInvalidArgument, "token overlap threshold must lie in (0, 1]");
  }
}

bool TokenOverlapOracle::Entails(std::string_view premise, std::string_view hypothesis) {
  return UnigramF1(premise, hypothesis) >= threshold_;
}

bool LlmEntailmentOracle::Entails(std::string_view premise, std::string_view hypothesis) {
  const std::string prompt = RenderPrompt(PromptTemplate(PromptId::kEntailment),
                                          {{"first", premise}, {"second", hypothesis}});
  const ChatTurn turn{Role::kUser, prompt};
  const auto tokens = Tokenize(judge_.Complete(std::span<const ChatTurn>(&turn, 1)));
  if (!tokens.empty() && tokens.front() == "yes") return true;
  if (!tokens.empty() && tokens.front() == "no") return false;
  throw Error(ErrorCode::kUnparseable, "entailment judge did not answer yes or no");
}

std::unique_ptr<EquivalenceOracle> MakeOracle(const EquivalenceOracleSpec& spec, ChatBackend* judge) {
  switch (spec.kind) {
    case OracleKind::kExactMatch:
      return std::make_unique<ExactMatchOracle>();
    case OracleKind::kTokenOverlap:
      return std::make_unique<TokenOverlapOracle>(spec.threshold);
    case OracleKind::kLlmJudge:
      if (judge == nullptr) throw Error(ErrorCode::kConfig, "llm_judge oracle needs a judge backend");
      return std::make_unique<LlmEntailmentOracle>(*judge);
  }
  throw Error(ErrorCode::kConfig, "unknown oracle kind");
}

std::vector<int> Clustering::sizes() const {
  std::vector<int> out;
  out.reserve(clusters.size());
  for (const auto& c : clusters) out.push_back(static_cast<int>(c.size()));
  return out;
}

Clustering Cluster(std::span<const std::string> responses, EquivalenceOracle& oracle) {
  if (responses.empty()) throw Error(ErrorCode::kInvalidArgument, "nothing to cluster");
  Clustering result;
  for (size_t i = 0; i < responses.size(); ++i) {
    bool placed = false;
    for (auto& cluster : result.clusters) {
      if (oracle.Equivalent(responses[static_cast<size_t>(cluster.front())], responses[i])) {
        cluster.push_back(static_cast<int>(i));
        placed = true;
        break;
      }
    }
    if (!placed) result.clusters.push_back({static_cast<int>(i)});
  }
  return result;
}

double EntropyOfSizes(std::span<const int> sizes) {
  double total = 0.0;
  for (int n : sizes) {
    if (n <= 0) throw Error(ErrorCode::kInvalidArgument, "cluster sizes must be positive");
    total += n;
  }
  if (total == 0.0) throw Error(ErrorCode::kInvalidArgument, "empty clustering");
  double h = 0.0;
  for (int n : sizes) {
    const double p = n / total;
    h -= p * std::log(p);
  }
  // A single cluster gives -1 * ln(1) = -0.0.
  return h <= 0.0 ? 0.0 : h;
}

double Entropy(const Clustering& clustering) {
  const auto sizes = clustering.sizes();
  return EntropyOfSizes(sizes);
}

EntropyEstimate SemanticEntropyOf(std::string_view query, ChatBackend& target, int k,
                                  EquivalenceOracle& oracle) {
  EntropyEstimate estimate;
  estimate.responses = SampleK(target, query, k);
  estimate.clustering = Cluster(estimate.responses, oracle);
  estimate.entropy = Entropy(estimate.clustering);
  return estimate;
}

}  // namespace halmit
