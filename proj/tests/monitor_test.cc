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

#include <cmath>
#include <random>
#include <string>
#include <vector>

#include <gtest/gtest.h>

#include "halmit/chat.h"
#include "halmit/error.h"
#include "halmit/monitor.h"
#include "halmit/semantic_entropy.h"
#include "halmit/vector_store.h"
#include "json.hpp"
#include "reference_monitor.h"
#include "test_util.h"

namespace halmit {
namespace {

using testing::CountingBackend;
using testing::Script;
using testing::TableEmbedder;

BoundaryRecord At(std::span<const double> v, double h) {
  BoundaryRecord r;
  r.domain = "d";
  r.query = "record";
  const Vector n = Normalized(v);
  r.embedding.assign(n.begin(), n.end());
  r.semantic_entropy = h;
  return r;
}

Neighbor N(std::vector<float> e, double s) {
  Neighbor n;
  n.record.embedding = std::move(e);
  n.similarity = s;
  return n;
}

TEST(CentroidTest, WeightedTwoDimensional) {
  const std::vector<Neighbor> n = {N({1, 0}, 1.0), N({0, 1}, 1.0), N({1, 0}, 2.0)};
  const Vector c = Centroid(n);
  EXPECT_NEAR(c[0], 0.9487, 1e-4);
  EXPECT_NEAR(c[1], 0.3162, 1e-4);
  EXPECT_NEAR(c[0], 0.75 / std::sqrt(0.625), 1e-12);
}

TEST(CentroidTest, IdenticalVectorsAndEqualWeights) {
  const std::vector<Neighbor> same = {N({0.6f, 0.8f}, 0.3), N({0.6f, 0.8f}, 0.9), N({0.6f, 0.8f}, 0.5)};
  const Vector c = Centroid(same);
  EXPECT_NEAR(c[0], 0.6, 1e-7);
  EXPECT_NEAR(c[1], 0.8, 1e-7);
  const std::vector<Neighbor> equal = {N({1, 0}, 0.7), N({0, 1}, 0.7), N({0, 1}, 0.7)};
  const Vector m = Centroid(equal);
  EXPECT_NEAR(m[0], 1 / std::sqrt(5.0), 1e-12);
  EXPECT_NEAR(m[1], 2 / std::sqrt(5.0), 1e-12);
}

TEST(CentroidTest, DegenerateWeights) {
  const std::vector<Neighbor> zero = {N({1, 0}, 0.5), N({0, 1}, -0.5), N({1, 0}, 0.0)};
  try {
    Centroid(zero);
    FAIL();
  } catch (const Error& e) {
    EXPECT_EQ(e.code(), ErrorCode::kDegenerate);
  }
  const std::vector<Neighbor> two = {N({1, 0}, 0.5), N({0, 1}, 0.5)};
  EXPECT_THROW(Centroid(two), Error);
}

class MonitorFixture : public ::testing::Test {
 protected:
  MonitorFixture() : embedder_(3), store_(3) {}
  TableEmbedder embedder_;
  VectorStore store_;
  ExactMatchOracle oracle_;
};

TEST_F(MonitorFixture, CopiesOfTheQueryFlagByCentroid) {
  const Vector v = {1.0, 2.0, 2.0};
  for (int i = 0; i < 3; ++i) store_.Insert(At(v, 0.9));
  embedder_.Set("q", v);
  ScriptedBackend target(Script{{"*", {"x"}}});
  CountingBackend counting(target);
  const Monitor m(store_, {&embedder_, &counting, &oracle_}, MonitorConfig{});
  const Verdict verdict = m.Check("q", std::nullopt);
  EXPECT_TRUE(verdict.flagged);
  EXPECT_EQ(verdict.reason, VerdictReason::kCentroidProximity);
  EXPECT_NEAR(*verdict.centroid_similarity, 1.0, 1e-6);
  EXPECT_FALSE(verdict.query_entropy.has_value());
  EXPECT_EQ(counting.calls(), 0);
}

TEST_F(MonitorFixture, EntropyPathWithinBoundAndExceeding) {
  // Neighbors at cosine 0.1 from the query, entropy of sizes {3,2}.
  const double h = -(0.6 * std::log(0.6) + 0.4 * std::log(0.4));
  for (int i = 0; i < 3; ++i) {
    const double angle = 0.3 * i;
    const Vector v = {0.1, std::sqrt(0.99) * std::cos(angle), std::sqrt(0.99) * std::sin(angle)};
    store_.Insert(At(v, h));
  }
  const Vector x = {1.0, 0.0, 0.0};
  embedder_.Set("calm", x);
  embedder_.Set("wild", x);
  ScriptedBackend target(Script{{"calm", {"same"}}, {"wild", {"a", "b", "c", "d"}}});
  const Monitor m(store_, {&embedder_, &target, &oracle_}, MonitorConfig{});

  const Verdict calm = m.Check("calm", std::nullopt);
  EXPECT_FALSE(calm.flagged);
  EXPECT_EQ(calm.reason, VerdictReason::kWithinBound);
  EXPECT_EQ(*calm.query_entropy, 0.0);
  EXPECT_NEAR(*calm.neighbor_max_entropy, 0.6730, 1e-4);

  const Verdict wild = m.Check("wild", std::nullopt);
  EXPECT_TRUE(wild.flagged);
  EXPECT_EQ(wild.reason, VerdictReason::kEntropyExceeds);
  EXPECT_NEAR(*wild.query_entropy, 1.3322, 1e-4);
}

TEST_F(MonitorFixture, EmptyStore) {
  embedder_.Set("q", Vector{1.0, 0.0, 0.0});
  ScriptedBackend target(Script{{"*", {"x"}}});
  const Monitor m(store_, {&embedder_, &target, &oracle_}, MonitorConfig{});
  const Verdict v = m.Check("q", std::nullopt);
  EXPECT_FALSE(v.flagged);
  EXPECT_EQ(v.reason, VerdictReason::kEmptyStore);
  EXPECT_EQ(MonitorScore(v, m.config()), 0.0);
}

TEST_F(MonitorFixture, DomainFilterLimitsRetrieval) {
  const Vector v = {1.0, 0.0, 0.0};
  for (int i = 0; i < 3; ++i) store_.Insert(At(v, 0.2));
  embedder_.Set("q", v);
  ScriptedBackend target(Script{{"*", {"x"}}});
  const Monitor m(store_, {&embedder_, &target, &oracle_}, MonitorConfig{});
  EXPECT_EQ(m.Check("q", std::string("other")).reason, VerdictReason::kEmptyStore);
  EXPECT_EQ(m.Check("q", std::string("d")).reason, VerdictReason::kCentroidProximity);
}

TEST(MonitorConfigTest, Validation) {
  MonitorConfig c;
  EXPECT_EQ(c.epsilon_sim, 0.8);
  c.epsilon_sim = 1.0;
  EXPECT_THROW(c.Validate(), Error);
  c = MonitorConfig{};
  c.k_entropy = 1;
  EXPECT_THROW(c.Validate(), Error);
}

TEST(MonitorTest, MatchesReferenceAndInvariantsOnRandomStores) {
  std::mt19937_64 rng(11);
  ExactMatchOracle oracle;
  for (int trial = 0; trial < 300; ++trial) {
    auto c = testing::MakeRandomCase(rng, 8, 10, 5);
    TableEmbedder embedder(8);
    embedder.Set("q", c.query);
    ScriptedBackend target(Script{{"*", c.replies}});
    MonitorConfig config;
    config.epsilon_sim = 0.6 + 0.1 * static_cast<double>(trial % 4);
    const Monitor m(c.store, {&embedder, &target, &oracle}, config);
    const Verdict v = m.Check("q", std::nullopt);
    const auto want = testing::ReferenceCheck(c.store.Records(), c.query, config.epsilon_sim,
                                              config.k_retrieve, c.replies);
    EXPECT_EQ(v.reason, want.reason) << "trial " << trial;
    EXPECT_EQ(v.flagged, want.flagged) << "trial " << trial;
    if (v.reason == VerdictReason::kCentroidProximity) EXPECT_GE(*v.centroid_similarity, config.epsilon_sim);
    if (v.reason == VerdictReason::kEntropyExceeds) EXPECT_GT(*v.query_entropy, *v.neighbor_max_entropy);
    EXPECT_EQ(v.flagged, v.reason == VerdictReason::kCentroidProximity ||
                             v.reason == VerdictReason::kEntropyExceeds);
    const double score = MonitorScore(v, config);
    EXPECT_TRUE(std::isfinite(score));
    if (v.reason != VerdictReason::kCentroidProximity && v.reason != VerdictReason::kEmptyStore) {
      EXPECT_LE(score, config.epsilon_sim);
    }
  }
}

TEST(MonitorTest, RaisingEpsilonNeverCreatesCentroidVerdicts) {
  std::mt19937_64 rng(12);
  ExactMatchOracle oracle;
  for (int trial = 0; trial < 200; ++trial) {
    auto c = testing::MakeRandomCase(rng, 8, 10, 5);
    TableEmbedder embedder(8);
    embedder.Set("q", c.query);
    ScriptedBackend target(Script{{"*", c.replies}});
    bool was_centroid = true;
    for (double eps = 0.5; eps < 0.96; eps += 0.05) {
      MonitorConfig config;
      config.epsilon_sim = eps;
      const Monitor m(c.store, {&embedder, &target, &oracle}, config);
      const bool centroid = m.Check("q", std::nullopt).reason == VerdictReason::kCentroidProximity;
      if (centroid) EXPECT_TRUE(was_centroid) << "eps " << eps;
      was_centroid = centroid;
    }
  }
}

TEST(MonitorTest, BatchEqualsSequential) {
  std::mt19937_64 rng(13);
  auto c = testing::MakeRandomCase(rng, 8, 10, 5);
  while (c.store.size() < 5) c = testing::MakeRandomCase(rng, 8, 10, 5);
  TableEmbedder embedder(8);
  std::vector<std::string> queries;
  Script script;
  for (int i = 0; i < 100; ++i) {
    const std::string q = "query " + std::to_string(i);
    queries.push_back(q);
    embedder.Set(q, testing::RandomUnit(8, rng));
    script[q] = {std::to_string(i % 3), std::to_string(i % 5), "z"};
  }
  queries.push_back("unknown");
  ScriptedBackend target(script);
  ExactMatchOracle oracle;
  const Monitor m(c.store, {&embedder, &target, &oracle}, MonitorConfig{});
  const auto batch = m.CheckBatch(queries, std::nullopt, 4);
  ASSERT_EQ(batch.size(), queries.size());
  for (size_t i = 0; i + 1 < queries.size(); ++i) {
    ASSERT_TRUE(batch[i].verdict.has_value());
    EXPECT_EQ(VerdictToJson(*batch[i].verdict), VerdictToJson(m.Check(queries[i], std::nullopt)));
  }
  EXPECT_FALSE(batch.back().verdict.has_value());
  EXPECT_FALSE(batch.back().error.empty());
  EXPECT_TRUE(m.CheckBatch({}, std::nullopt).empty());
}

TEST(MonitorTest, VerdictJsonFields) {
  Verdict v;
  v.flagged = true;
  v.reason = VerdictReason::kEntropyExceeds;
  v.query_entropy = 1.23456789;
  const auto j = nlohmann::json::parse(VerdictToJson(v));
  EXPECT_EQ(j["reason"], "entropy_exceeds");
  EXPECT_EQ(j["flagged"], true);
  EXPECT_DOUBLE_EQ(j["query_entropy"].get<double>(), 1.234568);
  EXPECT_TRUE(j["centroid_similarity"].is_null());
  EXPECT_TRUE(j["neighbors"].is_array());
}

}  // namespace
}  // namespace halmit
