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

// Semantic entropy of a batch of sampled responses: the responses are
// grouped into classes of mutually entailing answers and the discrete
// entropy of the class frequencies is reported in nats,
//
//   H = -sum_c (n_c / K) ln(n_c / K).

#ifndef HALMIT_SEMANTIC_ENTROPY_H_
#define HALMIT_SEMANTIC_ENTROPY_H_

#include <memory>
#include <span>
#include <string>
#include <string_view>
#include <vector>

#include "halmit/chat.h"

namespace halmit {

enum class OracleKind { kLlmJudge, kExactMatch, kTokenOverlap };

struct EquivalenceOracleSpec {
  OracleKind kind = OracleKind::kTokenOverlap;
  double threshold = 0.5;  // token_overlap: minimum unigram F1
};

// Directional entailment test. Two responses are equivalent only when each
// entails the other.
class EquivalenceOracle {
 public:
  virtual ~EquivalenceOracle() = default;
  virtual bool Entails(std::string_view premise, std::string_view hypothesis) = 0;
  bool Equivalent(std::string_view a, std::string_view b) {
    return Entails(a, b) && Entails(b, a);
  }
};

class ExactMatchOracle : public EquivalenceOracle {
 public:
  bool Entails(std::string_view premise, std::string_view hypothesis) override {
    return premise == hypothesis;
  }
};

// Unigram F1 over the shared tokenizer, at or above a threshold.
class TokenOverlapOracle : public EquivalenceOracle {
 public:
  explicit TokenOverlapOracle(double threshold);
  bool Entails(std::string_view premise, std::string_view hypothesis) override;

 private:
  double threshold_;
};

// Asks a judge model with the entailment prompt; the reply must start with
// yes or no.
class LlmEntailmentOracle : public EquivalenceOracle {
 public:
  explicit LlmEntailmentOracle(ChatBackend& judge) : judge_(judge) {}
  bool Entails(std::string_view premise, std::string_view hypothesis) override;

 private:
  ChatBackend& judge_;
};

// `judge` is required for kLlmJudge and must outlive the oracle.
std::unique_ptr<EquivalenceOracle> MakeOracle(const EquivalenceOracleSpec& spec,
                                              ChatBackend* judge = nullptr);

struct Clustering {
  std::vector<std::vector<int>> clusters;  // response indices, input order

  std::vector<int> sizes() const;
};

// Greedy first-fit: each response joins the first cluster whose
// representative (first member) it is equivalent to, else founds a new one.
Clustering Cluster(std::span<const std::string> responses, EquivalenceOracle& oracle);

double EntropyOfSizes(std::span<const int> sizes);
double Entropy(const Clustering& clustering);

struct EntropyEstimate {
  double entropy = 0.0;
  std::vector<std::string> responses;
  Clustering clustering;
};

// SampleK, Cluster and Entropy composed.
EntropyEstimate SemanticEntropyOf(std::string_view query, ChatBackend& target, int k,
                                  EquivalenceOracle& oracle);

}  // namespace halmit

#endif  // HALMIT_SEMANTIC_ENTROPY_H_
