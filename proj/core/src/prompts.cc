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

#include "halmit/prompts.h"

#include "halmit/text.h"

// Generated from assets/prompts by CMake.
namespace halmit::assets {
extern const char* const kPromptSeed;
extern const char* const kPromptFresh;
extern const char* const kPromptDeduction;
extern const char* const kPromptAnalogy;
extern const char* const kPromptInduction;
extern const char* const kPromptJudge;
extern const char* const kPromptEntailment;
}  // namespace halmit::assets

namespace halmit {

std::string_view PromptTemplate(PromptId id) {
  switch (id) {
    case PromptId::kSeed: return assets::kPromptSeed;
    case PromptId::kFresh: return assets::kPromptFresh;
    case PromptId::kDeduction: return assets::kPromptDeduction;
    case PromptId::kAnalogy: return assets::kPromptAnalogy;
    case PromptId::kInduction: return assets::kPromptInduction;
    case PromptId::kJudge: return assets::kPromptJudge;
    case PromptId::kEntailment: return assets::kPromptEntailment;
  }
  return {};
}

std::string RenderPrompt(std::string_view tmpl,
                         const std::vector<std::pair<std::string_view, std::string_view>>& vars) {
  std::string out;
  out.reserve(tmpl.size() + 64);
  size_t i = 0;
  while (i < tmpl.size()) {
    if (tmpl[i] == '{') {
      size_t close = tmpl.find('}', i);
      if (close != std::string_view::npos) {
        std::string_view name = tmpl.substr(i + 1, close - i - 1);
        bool replaced = false;
        for (const auto& [key, value] : vars) {
          if (key == name) {
            out.append(value);
            replaced = true;
            break;
          }
        }
        if (replaced) {
          i = close + 1;
          continue;
        }
      }
    }
    out.push_back(tmpl[i++]);
  }
  // Asset files end with a newline; prompts do not.
  while (!out.empty() && (out.back() == '\n' || out.back() == '\r')) out.pop_back();
  return out;
}

std::string PromptField(std::string_view prompt, std::string_view label) {
  const std::string prefix = std::string(label) + ": ";
  std::string value;
  size_t line_begin = 0;
  while (line_begin <= prompt.size()) {
    size_t line_end = prompt.find('\n', line_begin);
    if (line_end == std::string_view::npos) line_end = prompt.size();
    std::string_view line = prompt.substr(line_begin, line_end - line_begin);
    if (line.substr(0, prefix.size()) == prefix) value = Trim(line.substr(prefix.size()));
    line_begin = line_end + 1;
  }
  return value;
}

}  // namespace halmit
