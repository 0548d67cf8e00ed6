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

#ifndef HALMIT_SRC_HTTP_JSON_H_
#define HALMIT_SRC_HTTP_JSON_H_

#include <string>

#include "json.hpp"

namespace halmit::internal {

struct RetryPolicy {
  int attempts = 3;
  int backoff_ms = 500;  // doubled after every failed attempt
};

// POSTs `body` to endpoint + path and returns the parsed JSON reply. The
// bearer token comes from HALMIT_API_KEY when set. Transport failures and
// non-2xx statuses are retried; after the last attempt a kTransport Error is
// thrown.
nlohmann::json PostJson(const std::string& endpoint, const std::string& path,
                        const nlohmann::json& body, const RetryPolicy& retry);

}  // namespace halmit::internal

#endif  // HALMIT_SRC_HTTP_JSON_H_
