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

#ifndef HALMIT_EVALUATOR_H_
#define HALMIT_EVALUATOR_H_

#include <span>
#include <string>
#include <string_view>

#include "halmit/chat.h"

namespace halmit {

// Harmonic mean of unigram precision and recall with clipped multiset
// counts. 0 when either side has no tokens.
double UnigramF1(std::string_view candidate, std::string_view reference);

// LCS-based F-measure over token sequences (beta = 1).
double RougeL(std::string_view candidate, std::string_view reference);

struct GqaLabel {
  double unigram_f1 = 0.0;
  double rouge_l = 0.0;
  double mean = 0.0;
  bool hallucinated = false;  // mean < 0.5
};

// Reference-based label: hallucinated iff the mean of unigram F1 and
// ROUGE-L is strictly below 0.5.
GqaLabel LabelGqa(std::string_view candidate, std::string_view reference);

inline constexpr double kLowConfidence = 0.6;

struct Judgment {
  bool hallucinated = false;
  double confidence = 0.0;  // [0, 1]
  std::string rationale;
  bool low_confidence = false;  // confidence below kLowConfidence
};

// Parses "verdict: yes|no, confidence: 0-100". Throws kUnparseable.
Judgment ParseJudgment(std::string_view reply);

// Asks `backend` with the judge prompt; one reprompt on unparseable output.
Judgment Judge(std::string_view query, std::string_view response, ChatBackend& backend);

// Product over sig(a_k), where sig is 1 for a clean response and 0 for a
// hallucinated one.
int SigProduct(std::span<const Judgment> judgments);

}  // namespace halmit

#endif  // HALMIT_EVALUATOR_H_
