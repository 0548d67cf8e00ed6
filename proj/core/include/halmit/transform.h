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

#ifndef HALMIT_TRANSFORM_H_
#define HALMIT_TRANSFORM_H_

#include <array>
#include <optional>
#include <string_view>

namespace halmit {

// The three query transformations of the probabilistic fractal explorer.
enum class TransformKind {
  kDeduction = 0,  // more specific follow-up
  kAnalogy = 1,    // parallel or analogous question
  kInduction = 2,  // broader, more abstract question
};

inline constexpr std::array<TransformKind, 3> kAllTransforms = {
    TransformKind::kDeduction, TransformKind::kAnalogy, TransformKind::kInduction};

// One probability per TransformKind, indexed by its integer value.
using TransformProbabilities = std::array<double, 3>;

inline constexpr TransformProbabilities kUniformProbabilities = {1.0 / 3, 1.0 / 3, 1.0 / 3};

constexpr size_t Index(TransformKind kind) { return static_cast<size_t>(kind); }

std::string_view TransformName(TransformKind kind);
std::optional<TransformKind> ParseTransform(std::string_view name);

}  // namespace halmit

#endif  // HALMIT_TRANSFORM_H_
