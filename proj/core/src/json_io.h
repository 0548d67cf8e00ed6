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

// JSON mappings shared by the persistence, export and service code.

#ifndef HALMIT_SRC_JSON_IO_H_
#define HALMIT_SRC_JSON_IO_H_

#include <cmath>

#include "halmit/vector_store.h"
#include "json.hpp"

namespace halmit {

inline double RoundTo6(double x) { return std::round(x * 1e6) / 1e6; }

// Without the embedding when `with_embedding` is false (store metadata).
nlohmann::json RecordToJson(const BoundaryRecord& record, bool with_embedding);
BoundaryRecord RecordFromJson(const nlohmann::json& j);

}  // namespace halmit

#endif  // HALMIT_SRC_JSON_IO_H_
