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

#include "http_json.h"

#include <chrono>
#include <cstdlib>
#include <thread>

#include "halmit/error.h"
#include "httplib.h"

namespace halmit::internal {
namespace {

// Splits "http://host:port/v1" into ("http://host:port", "/v1").
std::pair<std::string, std::string> SplitEndpoint(const std::string& endpoint) {
  size_t scheme = endpoint.find("://");
  size_t host_begin = scheme == std::string::npos ? 0 : scheme + 3;
  size_t slash = endpoint.find('/', host_begin);
  if (slash == std::string::npos) return {endpoint, ""};
  std::string prefix = endpoint.substr(slash);
  while (!prefix.empty() && prefix.back() == '/') prefix.pop_back();
  return {endpoint.substr(0, slash), prefix};
}

}  // namespace

nlohmann::json PostJson(const std::string& endpoint, const std::string& path,
                        const nlohmann::json& body, const RetryPolicy& retry) {
  if (endpoint.empty()) {
    throw Error(ErrorCode::kConfig, "remote backend requires an endpoint");
  }
  auto [base, prefix] = SplitEndpoint(endpoint);
  httplib::Headers headers;
  if (const char* key = std::getenv("HALMIT_API_KEY"); key != nullptr && *key) {
    headers.emplace("Authorization", std::string("Bearer ") + key);
  }
  const std::string payload = body.dump();
  std::string last_error;
  int delay_ms = retry.backoff_ms;
  const int attempts = std::max(1, retry.attempts);
  for (int attempt = 0; attempt < attempts; ++attempt) {
    if (attempt > 0) {
      std::this_thread::sleep_for(std::chrono::milliseconds(delay_ms));
      delay_ms *= 2;
    }
    httplib::Client client(base);
    client.set_connection_timeout(10);
    client.set_read_timeout(120);
    auto result = client.Post(prefix + path, headers, payload, "application/json");
    if (!result) {
      last_error = httplib::to_string(result.error());
      continue;
    }
    if (result->status < 200 || result->status >= 300) {
      last_error = "HTTP " + std::to_string(result->status) + ": " + result->body;
      // A rejected request fails the same way on every attempt.
      const bool client_error = result->status >= 400 && result->status < 500 &&
                                result->status != 408 && result->status != 429;
      if (client_error) break;
      continue;
    }
    try {
      return nlohmann::json::parse(result->body);
    } catch (const nlohmann::json::parse_error& e) {
      throw Error(ErrorCode::kUnparseable, std::string("reply is not JSON: ") + e.what());
    }
  }
  throw Error(ErrorCode::kTransport, "POST " + base + prefix + path + " failed: " + last_error);
}

}  // namespace halmit::internal
