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

// Watchdog check of a single query against a store of boundary records.
//
// The query embedding is compared with its nearest boundary records. When
// at least three of them are more similar than epsilon, their
// similarity-weighted centroid decides: a query within epsilon of the
// centroid is flagged. Otherwise the query's own semantic entropy is
// compared with the largest entropy among the retrieved records.

#ifndef HALMIT_MONITOR_H_
#define HALMIT_MONITOR_H_

#include <optional>
#include <span>
#include <string>
#include <string_view>
#include <vector>

#include "halmit/chat.h"
#include "halmit/embedding.h"
#include "halmit/semantic_entropy.h"
#include "halmit/vector_store.h"

namespace halmit {

struct MonitorConfig {
  double epsilon_sim = 0.8;
  int k_retrieve = 8;
  int k_entropy = 5;

  // Throws kConfig.
  void Validate() const;
};

enum class VerdictReason { kCentroidProximity, kEntropyExceeds, kWithinBound, kEmptyStore };
std::string_view VerdictReasonName(VerdictReason reason);

struct Verdict {
  bool flagged = false;
  VerdictReason reason = VerdictReason::kEmptyStore;
  std::optional<double> centroid_similarity;
  std::optional<double> query_entropy;
  std::optional<double> neighbor_max_entropy;
  std::vector<Neighbor> neighbors;
};

// Normalized sum_i S_i v_i / sum_i S_i over exactly three neighbors.
// Throws kDegenerate when the weights or the weighted sum vanish.
Vector Centroid(std::span<const Neighbor> neighbors);

struct MonitorAgents {
  const Embedder* embedder = nullptr;
  ChatBackend* target = nullptr;
  EquivalenceOracle* oracle = nullptr;
};

// Read-only over the store; Check may be called concurrently.
class Monitor {
 public:
  Monitor(const VectorStore& store, MonitorAgents agents, MonitorConfig config);

  const MonitorConfig& config() const { return config_; }

  // `domain` restricts retrieval to records with that tag.
  Verdict Check(std::string_view query, const std::optional<std::string>& domain) const;

  struct Item {
    std::optional<Verdict> verdict;
    std::string error;
  };
  // Order preserved; a failing item records its error and the batch goes on.
  std::vector<Item> CheckBatch(std::span<const std::string> queries,
                               const std::optional<std::string>& domain, int workers = 1) const;

 private:
  const VectorStore& store_;
  MonitorAgents agents_;
  MonitorConfig config_;
};

// Continuous score for ranking: S_C on the centroid path, otherwise
// epsilon * H / ln K, which keeps entropy-path scores at or below every
// centroid-path score. 0 for an empty store.
double MonitorScore(const Verdict& verdict, const MonitorConfig& config);

// Stable field names; similarities and entropies rounded to 6 decimals.
std::string VerdictToJson(const Verdict& verdict);

}  // namespace halmit

#endif  // HALMIT_MONITOR_H_
