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

#include "halmit/monitor.h"

#include <algorithm>
#include <cmath>

#include <spdlog/spdlog.h>

#include "halmit/error.h"
#include "json.hpp"
#include "json_io.h"
#include "parallel.h"

namespace halmit {

void MonitorConfig::Validate() const {
  if (!(epsilon_sim > 0.0 && epsilon_sim < 1.0)) {
    throw Error(ErrorCode::kConfig, "epsilon_sim must lie in (0, 1)");
  }
  if (k_retrieve < 1) throw Error(ErrorCode::kConfig, "k_retrieve must be positive");
  if (k_entropy < 2) throw Error(ErrorCode::kConfig, "k_entropy must be at least 2");
}

std::string_view VerdictReasonName(VerdictReason reason) {
  switch (reason) {
    case VerdictReason::kCentroidProximity: return "centroid_proximity";
    case VerdictReason::kEntropyExceeds: return "entropy_exceeds";
    case VerdictReason::kWithinBound: return "within_bound";
    case VerdictReason::kEmptyStore: return "empty_store";
  }
  return "empty_store";
}

Vector Centroid(std::span<const Neighbor> neighbors) {
  if (neighbors.size() != 3) throw Error(ErrorCode::kInvalidArgument, "centroid needs three neighbors");
  const size_t d = neighbors.front().record.embedding.size();
  double weight = 0.0;
  Vector sum(d, 0.0);
  for (const auto& n : neighbors) {
    if (n.record.embedding.size() != d) throw Error(ErrorCode::kDimensionMismatch, "neighbor dimensions differ");
    weight += n.similarity;
    for (size_t i = 0; i < d; ++i) sum[i] += n.similarity * n.record.embedding[i];
  }
  if (weight == 0.0) throw Error(ErrorCode::kDegenerate, "neighbor similarities sum to zero");
  for (double& x : sum) x /= weight;
  return Normalized(sum);
}

Monitor::Monitor(const VectorStore& store, MonitorAgents agents, MonitorConfig config)
    : store_(store), agents_(agents), config_(config) {
  config_.Validate();
  if (!agents_.embedder || !agents_.target || !agents_.oracle) {
    throw Error(ErrorCode::kInvalidArgument, "monitor needs an embedder, a target and an oracle");
  }
  if (agents_.embedder->dimension() != store_.dimension()) {
    throw Error(ErrorCode::kDimensionMismatch, "store dimension does not match the embedder");
  }
}

Verdict Monitor::Check(std::string_view query, const std::optional<std::string>& domain) const {
  const Vector q = agents_.embedder->Embed(query);
  Verdict v;
  v.neighbors = store_.TopK(q, config_.k_retrieve, domain);
  if (v.neighbors.empty()) {
    spdlog::warn("no boundary records{}; query not flagged",
                 domain ? " for domain '" + *domain + "'" : std::string());
    v.reason = VerdictReason::kEmptyStore;
    return v;
  }
  const double eps = config_.epsilon_sim;
  if (v.neighbors.size() >= 3 && v.neighbors[2].similarity > eps) {
    try {
      const Vector c = Centroid(std::span<const Neighbor>(v.neighbors.data(), 3));
      v.centroid_similarity = Dot(q, c);
      if (*v.centroid_similarity >= eps) {
        v.flagged = true;
        v.reason = VerdictReason::kCentroidProximity;
        return v;
      }
    } catch (const Error& e) {
      if (e.code() != ErrorCode::kDegenerate) throw;
    }
  }
  v.query_entropy = SemanticEntropyOf(query, *agents_.target, config_.k_entropy, *agents_.oracle).entropy;
  double max_h = v.neighbors.front().record.semantic_entropy;
  for (const auto& n : v.neighbors) max_h = std::max(max_h, n.record.semantic_entropy);
  v.neighbor_max_entropy = max_h;
  v.flagged = *v.query_entropy > max_h;
  v.reason = v.flagged ? VerdictReason::kEntropyExceeds : VerdictReason::kWithinBound;
  return v;
}

std::vector<Monitor::Item> Monitor::CheckBatch(std::span<const std::string> queries,
                                               const std::optional<std::string>& domain,
                                               int workers) const {
  std::vector<Item> items(queries.size());
  internal::ParallelFor(queries.size(), workers, [&](size_t i) {
    try {
      items[i].verdict = Check(queries[i], domain);
    } catch (const Error& e) {
      items[i].error = e.what();
    }
  });
  return items;
}

double MonitorScore(const Verdict& verdict, const MonitorConfig& config) {
  if (verdict.reason == VerdictReason::kCentroidProximity) return *verdict.centroid_similarity;
  if (!verdict.query_entropy) return 0.0;
  return config.epsilon_sim * *verdict.query_entropy / std::log(static_cast<double>(config.k_entropy));
}

std::string VerdictToJson(const Verdict& verdict) {
  using nlohmann::json;
  auto rounded = [](const std::optional<double>& x) { return x ? json(RoundTo6(*x)) : json(nullptr); };
  json neighbors = json::array();
  for (const auto& n : verdict.neighbors) {
    json r = RecordToJson(n.record, false);
    r["semantic_entropy"] = RoundTo6(n.record.semantic_entropy);
    neighbors.push_back({{"record", r}, {"similarity", RoundTo6(n.similarity)}});
  }
  json j = {{"flagged", verdict.flagged},
            {"reason", VerdictReasonName(verdict.reason)},
            {"centroid_similarity", rounded(verdict.centroid_similarity)},
            {"query_entropy", rounded(verdict.query_entropy)},
            {"neighbor_max_entropy", rounded(verdict.neighbor_max_entropy)},
            {"neighbors", neighbors}};
  return j.dump();
}

}  // namespace halmit
