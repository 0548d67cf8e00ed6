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

#include <random>
#include <vector>

#include <gtest/gtest.h>

#include "halmit/error.h"
#include "halmit/metrics.h"
#include "oracles.h"
#include "test_util.h"

namespace halmit {
namespace {

using testing::Bools;

TEST(AurocTest, Examples) {
  const std::vector<double> perfect = {0.1, 0.2, 0.8, 0.9};
  EXPECT_EQ(Auroc(perfect, Bools{0, 0, 1, 1}), 1.0);
  const std::vector<double> worked = {0.1, 0.4, 0.35, 0.8};
  EXPECT_EQ(Auroc(worked, Bools{0, 0, 1, 1}), 0.75);
  const std::vector<double> ties = {0.3, 0.3, 0.3, 0.3};
  EXPECT_EQ(Auroc(ties, Bools{0, 1, 0, 1}), 0.5);
}

TEST(AurocTest, SingleClassIsDegenerate) {
  const std::vector<double> s = {0.1, 0.2};
  try {
    Auroc(s, Bools{1, 1});
    FAIL();
  } catch (const Error& e) {
    EXPECT_EQ(e.code(), ErrorCode::kDegenerate);
  }
  EXPECT_THROW(Auroc(s, Bools{1}), Error);
}

TEST(AucPrTest, Examples) {
  const std::vector<double> perfect = {0.9, 0.8, 0.2, 0.1};
  EXPECT_EQ(AucPr(perfect, Bools{1, 1, 0, 0}), 1.0);
  const std::vector<double> s = {0.9, 0.8, 0.7};
  EXPECT_NEAR(AucPr(s, Bools{1, 0, 1}), (1.0 + 2.0 / 3.0) / 2.0, 1e-15);
  EXPECT_EQ(AucPr(s, Bools{1, 1, 1}), 1.0);
  EXPECT_THROW(AucPr(s, Bools{0, 0, 0}), Error);
}

TEST(MetricOracleTest, RandomInstancesWithTies) {
  std::mt19937_64 rng(5);
  for (int trial = 0; trial < 100; ++trial) {
    const size_t n = 2 + rng() % 60;
    std::vector<double> s(n);
    Bools y(n);
    for (size_t i = 0; i < n; ++i) {
      s[i] = static_cast<double>(rng() % 7) / 7.0;
      y[i] = i < 2 ? i == 0 : rng() % 3 == 0;
    }
    EXPECT_NEAR(Auroc(s, y), testing::PairCountAuroc(s, y), 1e-12);
    EXPECT_NEAR(AucPr(s, y), testing::ExhaustiveAveragePrecision(s, y), 1e-12);
  }
}

TEST(F1AccuracyTest, Examples) {
  const Bools a{1, 0, 1, 0};
  const F1Accuracy same = ComputeF1Accuracy(a, a);
  EXPECT_EQ(same.f1, 1.0);
  EXPECT_EQ(same.accuracy, 1.0);
  const F1Accuracy half = ComputeF1Accuracy(Bools{1, 1, 0, 0}, Bools{1, 0, 1, 0});
  EXPECT_EQ(half.f1, 0.5);
  EXPECT_EQ(half.accuracy, 0.5);
  const Bools none{0, 0, 0};
  const F1Accuracy empty = ComputeF1Accuracy(none, none);
  EXPECT_EQ(empty.f1, 1.0);
  EXPECT_EQ(empty.accuracy, 1.0);
  EXPECT_EQ(ComputeF1Accuracy(none, Bools{1, 0, 0}).f1, 0.0);
  EXPECT_THROW(ComputeF1Accuracy(none, Bools{1}), Error);
}

}  // namespace
}  // namespace halmit
