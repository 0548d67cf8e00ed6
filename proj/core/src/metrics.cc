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

#include "halmit/metrics.h"

#include <algorithm>
#include <cmath>
#include <numeric>
#include <vector>

#include "halmit/error.h"

namespace halmit {
namespace {

void CheckShapes(std::span<const double> scores, std::span<const bool> labels) {
  if (scores.size() != labels.size()) {
    throw Error(ErrorCode::kInvalidArgument, "scores and labels differ in length");
  }
  for (double s : scores) {
    if (!std::isfinite(s)) throw Error(ErrorCode::kInvalidArgument, "non-finite score");
  }
}

}  // namespace

double Auroc(std::span<const double> scores, std::span<const bool> labels) {
  CheckShapes(scores, labels);
  std::vector<size_t> order(scores.size());
  std::iota(order.begin(), order.end(), 0);
  std::sort(order.begin(), order.end(), [&](size_t a, size_t b) { return scores[a] < scores[b]; });
  // Sum of midranks of the positives (Mann-Whitney U).
  double positive_rank_sum = 0.0;
  double positives = 0.0;
  for (size_t i = 0; i < order.size();) {
    size_t j = i;
    while (j < order.size() && scores[order[j]] == scores[order[i]]) ++j;
    const double midrank = (static_cast<double>(i + 1) + static_cast<double>(j)) / 2.0;
    for (size_t t = i; t < j; ++t) {
      if (labels[order[t]]) {
        positive_rank_sum += midrank;
        positives += 1.0;
      }
    }
    i = j;
  }
  const double negatives = static_cast<double>(scores.size()) - positives;
  if (positives == 0.0 || negatives == 0.0) {
    throw Error(ErrorCode::kDegenerate, "AUROC needs both classes");
  }
  const double u = positive_rank_sum - positives * (positives + 1.0) / 2.0;
  return u / (positives * negatives);
}

double AucPr(std::span<const double> scores, std::span<const bool> labels) {
  CheckShapes(scores, labels);
  std::vector<size_t> order(scores.size());
  std::iota(order.begin(), order.end(), 0);
  std::stable_sort(order.begin(), order.end(),
                   [&](size_t a, size_t b) { return scores[a] > scores[b]; });
  double hits = 0.0;
  double sum = 0.0;
  for (size_t rank = 0; rank < order.size(); ++rank) {
    if (labels[order[rank]]) {
      hits += 1.0;
      sum += hits / static_cast<double>(rank + 1);
    }
  }
  if (hits == 0.0) throw Error(ErrorCode::kDegenerate, "AUC-PR needs a positive label");
  return sum / hits;
}

F1Accuracy ComputeF1Accuracy(std::span<const bool> predictions, std::span<const bool> labels) {
  if (predictions.size() != labels.size()) {
    throw Error(ErrorCode::kInvalidArgument, "predictions and labels differ in length");
  }
  if (labels.empty()) throw Error(ErrorCode::kInvalidArgument, "no predictions");
  double tp = 0, fp = 0, fn = 0, tn = 0;
  for (size_t i = 0; i < labels.size(); ++i) {
    if (predictions[i] && labels[i]) ++tp;
    if (predictions[i] && !labels[i]) ++fp;
    if (!predictions[i] && labels[i]) ++fn;
    if (!predictions[i] && !labels[i]) ++tn;
  }
  F1Accuracy out;
  out.accuracy = (tp + tn) / static_cast<double>(labels.size());
  if (tp + fp == 0 && tp + fn == 0) {
    out.f1 = 1.0;
  } else if (tp + fp == 0 || tp + fn == 0 || tp == 0) {
    out.f1 = 0.0;
  } else {
    out.f1 = 2.0 * tp / (2.0 * tp + fp + fn);
  }
  return out;
}

}  // namespace halmit
