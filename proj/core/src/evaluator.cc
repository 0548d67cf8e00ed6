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

#include "halmit/evaluator.h"

#include <algorithm>
#include <regex>
#include <unordered_map>
#include <vector>

#include "halmit/error.h"
#include "halmit/prompts.h"
#include "halmit/text.h"

namespace halmit {
namespace {

double FMeasure(double overlap, size_t candidate_len, size_t reference_len) {
  if (overlap <= 0.0 || candidate_len == 0 || reference_len == 0) return 0.0;
  const double precision = overlap / static_cast<double>(candidate_len);
  const double recall = overlap / static_cast<double>(reference_len);
  return 2.0 * precision * recall / (precision + recall);
}

size_t LcsLength(const std::vector<std::string>& a, const std::vector<std::string>& b) {
  std::vector<size_t> prev(b.size() + 1, 0);
  std::vector<size_t> cur(b.size() + 1, 0);
  for (size_t i = 1; i <= a.size(); ++i) {
    for (size_t j = 1; j <= b.size(); ++j) {
      cur[j] = a[i - 1] == b[j - 1] ? prev[j - 1] + 1 : std::max(prev[j], cur[j - 1]);
    }
    std::swap(prev, cur);
  }
  return prev[b.size()];
}

}  // namespace

double UnigramF1(std::string_view candidate, std::string_view reference) {
  const auto cand = Tokenize(candidate);
  const auto ref = Tokenize(reference);
  std::unordered_map<std::string, int> ref_counts;
  for (const auto& t : ref) ++ref_counts[t];
  double overlap = 0.0;
  for (const auto& t : cand) {
    auto it = ref_counts.find(t);
    if (it != ref_counts.end() && it->second > 0) {
      --it->second;
      overlap += 1.0;
    }
  }
  return FMeasure(overlap, cand.size(), ref.size());
}

double RougeL(std::string_view candidate, std::string_view reference) {
  const auto cand = Tokenize(candidate);
  const auto ref = Tokenize(reference);
  return FMeasure(static_cast<double>(LcsLength(cand, ref)), cand.size(), ref.size());
}

GqaLabel LabelGqa(std::string_view candidate, std::string_view reference) {
  if (Trim(reference).empty()) throw Error(ErrorCode::kInvalidArgument, "empty reference answer");
  GqaLabel label;
  label.unigram_f1 = UnigramF1(candidate, reference);
  label.rouge_l = RougeL(candidate, reference);
  label.mean = (label.unigram_f1 + label.rouge_l) / 2.0;
  label.hallucinated = label.mean < 0.5;
  return label;
}

Judgment ParseJudgment(std::string_view reply) {
  static const std::regex kVerdict(R"(verdict\s*[:=]\s*\**\s*(yes|no)\b)", std::regex::icase);
  static const std::regex kConfidence(R"(confidence\s*[:=]\s*\**\s*([0-9]+(?:\.[0-9]+)?)\s*(%?))",
                                      std::regex::icase);
  const std::string text(reply);
  std::smatch verdict;
  std::smatch confidence;
  if (!std::regex_search(text, verdict, kVerdict) || !std::regex_search(text, confidence, kConfidence)) {
    throw Error(ErrorCode::kUnparseable, "judge reply lacks verdict or confidence: " + text.substr(0, 120));
  }
  Judgment j;
  j.hallucinated = ToLower(verdict[1].str()) == "yes";
  j.confidence = std::clamp(std::stod(confidence[1].str()) / 100.0, 0.0, 1.0);
  j.low_confidence = j.confidence < kLowConfidence;
  const size_t end = static_cast<size_t>(confidence.position(0) + confidence.length(0));
  j.rationale = Trim(std::string_view(text).substr(std::min(end, text.size())));
  if (!j.rationale.empty() && (j.rationale.front() == ',' || j.rationale.front() == '.')) {
    j.rationale = Trim(std::string_view(j.rationale).substr(1));
  }
  return j;
}

Judgment Judge(std::string_view query, std::string_view response, ChatBackend& backend) {
  const std::string prompt = RenderPrompt(PromptTemplate(PromptId::kJudge),
                                          {{"query", query}, {"response", response}});
  const ChatTurn turn{Role::kUser, prompt};
  const std::span<const ChatTurn> turns(&turn, 1);
  try {
    return ParseJudgment(backend.Complete(turns, 0));
  } catch (const Error& e) {
    if (e.code() != ErrorCode::kUnparseable) throw;
  }
  return ParseJudgment(backend.Complete(turns, 1));
}

int SigProduct(std::span<const Judgment> judgments) {
  for (const auto& j : judgments) {
    if (j.hallucinated) return 0;
  }
  return 1;
}

}  // namespace halmit
