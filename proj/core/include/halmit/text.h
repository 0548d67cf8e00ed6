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

// Text utilities shared by the embedder, the metrics and the overlap oracle.

#ifndef HALMIT_TEXT_H_
#define HALMIT_TEXT_H_

#include <cstdint>
#include <string>
#include <string_view>
#include <vector>

namespace halmit {

// Lowercases, treats every non-alphanumeric byte as a separator and returns
// the remaining tokens in order. This is the only tokenizer in the project.
std::vector<std::string> Tokenize(std::string_view text);

// 64-bit FNV-1a.
uint64_t Fnv1a64(std::string_view bytes, uint64_t seed = 0xcbf29ce484222325ULL);

// SplitMix64 finalizer; used to derive independent seeds from hashes.
uint64_t MixSeed(uint64_t value);

std::string Trim(std::string_view text);
std::string ToLower(std::string_view text);

}  // namespace halmit

#endif  // HALMIT_TEXT_H_
