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

#include "service.h"

#include <utility>

#include "halmit/error.h"
#include "httplib.h"
#include "json.hpp"

namespace halmit::cli {
namespace {

using nlohmann::json;

HttpReply ErrorReply(int status, const std::string& message) {
  return {status, json{{"error", message}}.dump() + "\n"};
}

int StatusFor(ErrorCode code) {
  switch (code) {
    case ErrorCode::kInvalidArgument:
    case ErrorCode::kDimensionMismatch:
      return 400;
    case ErrorCode::kTransport:
    case ErrorCode::kScriptMissing:
    case ErrorCode::kUnparseable:
      return 502;
    default:
      return 500;
  }
}

class SemaphoreGuard {
 public:
  explicit SemaphoreGuard(std::counting_semaphore<>& s) : s_(s) { s_.acquire(); }
  ~SemaphoreGuard() { s_.release(); }
  SemaphoreGuard(const SemaphoreGuard&) = delete;
  SemaphoreGuard& operator=(const SemaphoreGuard&) = delete;

 private:
  std::counting_semaphore<>& s_;
};

}  // namespace

std::string VerdictLine(const Verdict& verdict) { return VerdictToJson(verdict) + "\n"; }

Service::Service(Config config, Runtime runtime, std::optional<VectorStore> store)
    : config_(std::move(config)),
      runtime_(std::move(runtime)),
      store_(std::move(store)),
      in_flight_(config_.service.max_in_flight),
      server_(std::make_unique<httplib::Server>()) {
  if (store_) {
    monitor_ = std::make_unique<Monitor>(
        *store_, MonitorAgents{runtime_.embedder, runtime_.target.get(), runtime_.oracle.get()},
        config_.monitor);
  }
  InstallRoutes();
}

Service::~Service() = default;

HttpReply Service::Check(std::string_view request_body) {
  if (!monitor_) {
    return ErrorReply(503, "no boundary store is loaded; run `halmit explore` first");
  }
  json body;
  try {
    body = json::parse(request_body);
  } catch (const json::exception&) {
    return ErrorReply(400, "request body is not JSON");
  }
  if (!body.is_object()) return ErrorReply(400, "request body must be an object");
  std::string query;
  std::optional<std::string> domain = config_.domain;
  for (auto it = body.begin(); it != body.end(); ++it) {
    if (it.key() == "query" && it->is_string()) {
      query = it->get<std::string>();
    } else if (it.key() == "domain" && it->is_string()) {
      domain = it->get<std::string>();
    } else {
      return ErrorReply(400, "unexpected field '" + it.key() + "'");
    }
  }
  if (query.empty()) return ErrorReply(400, "query must be a non-empty string");

  SemaphoreGuard guard(in_flight_);
  try {
    return {200, VerdictLine(monitor_->Check(query, domain))};
  } catch (const Error& e) {
    return ErrorReply(StatusFor(e.code()), e.what());
  }
}

HttpReply Service::Boundary(const std::optional<std::string>& domain) const {
  int64_t count = 0;
  double sum = 0.0;
  if (store_) {
    for (const auto& r : store_->Records()) {
      if (domain && r.domain != *domain) continue;
      ++count;
      sum += r.semantic_entropy;
    }
  }
  json j = {{"count", count}, {"mean_entropy", count ? json(sum / static_cast<double>(count)) : json(nullptr)}};
  return {200, j.dump() + "\n"};
}

HttpReply Service::Health() const {
  json j = {{"status", store_ ? "ok" : "no_store"},
            {"store_records", store_ ? static_cast<int64_t>(store_->size()) : 0}};
  return {200, j.dump() + "\n"};
}

void Service::InstallRoutes() {
  auto send = [](httplib::Response& res, const HttpReply& reply) {
    res.status = reply.status;
    res.set_content(reply.body, "application/json");
  };
  server_->Post("/v1/check", [this, send](const httplib::Request& req, httplib::Response& res) {
    send(res, Check(req.body));
  });
  server_->Get("/v1/boundary", [this, send](const httplib::Request& req, httplib::Response& res) {
    std::optional<std::string> domain;
    if (req.has_param("domain")) domain = req.get_param_value("domain");
    send(res, Boundary(domain));
  });
  server_->Get("/v1/health", [this, send](const httplib::Request&, httplib::Response& res) {
    send(res, Health());
  });
}

bool Service::Listen(const std::string& host, int port) { return server_->listen(host, port); }

int Service::BindToAnyPort(const std::string& host) { return server_->bind_to_any_port(host); }

bool Service::ListenAfterBind() { return server_->listen_after_bind(); }

void Service::Stop() { server_->stop(); }

}  // namespace halmit::cli
