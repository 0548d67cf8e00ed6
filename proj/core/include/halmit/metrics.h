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

#ifndef HALMIT_METRICS_H_
#define HALMIT_METRICS_H_

#include <span>

namespace halmit {

// Probability that a random positive outscores a random negative, ties
// counting one half. Throws kDegenerate unless both classes are present.
double Auroc(std::span<const double> scores, std::span<const bool> labels);

// Average precision: the mean, over positives, of the precision at that
// positive's rank. Ranks follow descending score, ties in input order.
// Throws kDegenerate without positives.
double AucPr(std::span<const double> scores, std::span<const bool> labels);

struct F1Accuracy {
  double f1 = 0.0;
  double accuracy = 0.0;
};

// F1 is 1 when there are neither positive predictions nor positive labels,
// and 0 whenever precision or recall divides by zero otherwise.
F1Accuracy ComputeF1Accuracy(std::span<const bool> predictions, std::span<const bool> labels);

}  // namespace halmit

#endif  // HALMIT_METRICS_H_
