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

// Prompt templates. The canonical text lives in assets/prompts/*.txt and is
// compiled into the library; placeholders are written {name}.

#ifndef HALMIT_PROMPTS_H_
#define HALMIT_PROMPTS_H_

#include <string>
#include <string_view>
#include <utility>
#include <vector>

namespace halmit {

enum class PromptId { kSeed, kFresh, kDeduction, kAnalogy, kInduction, kJudge, kEntailment };

std::string_view PromptTemplate(PromptId id);

// Replaces each {name} with its value. Unknown placeholders are left as is.
std::string RenderPrompt(std::string_view tmpl,
                         const std::vector<std::pair<std::string_view, std::string_view>>& vars);

// Returns the value following "label: " on the last line that starts with
// it, or an empty string. Used by the synthetic backends to read the fields
// of a rendered prompt.
std::string PromptField(std::string_view prompt, std::string_view label);

}  // namespace halmit

#endif  // HALMIT_PROMPTS_H_
