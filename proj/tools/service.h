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

// HTTP watchdog over a frozen boundary store.
//
//   POST /v1/check     {"query": ..., "domain": ...}  -> verdict
//   GET  /v1/boundary?domain=D                        -> {count, mean_entropy}
//   GET  /v1/health                                   -> {status, store_records}
//
// Without a store /v1/check answers 503.

#ifndef HALMIT_TOOLS_SERVICE_H_
#define HALMIT_TOOLS_SERVICE_H_

#include <memory>
#include <optional>
#include <semaphore>
#include <string>
#include <string_view>

#include "commands.h"
#include "halmit/config.h"
#include "halmit/monitor.h"
#include "halmit/vector_store.h"

namespace httplib {
class Server;
}

namespace halmit::cli {

struct HttpReply {
  int status = 200;
  std::string body;
};

class Service {
 public:
  Service(Config config, Runtime runtime, std::optional<VectorStore> store);
  ~Service();

  HttpReply Check(std::string_view request_body);
  HttpReply Boundary(const std::optional<std::string>& domain) const;
  HttpReply Health() const;

  // Binds and serves until Stop(). Returns false when binding fails.
  bool Listen(const std::string& host, int port);
  // Binds to a free port and returns it, or -1.
  int BindToAnyPort(const std::string& host);
  bool ListenAfterBind();
  void Stop();

 private:
  void InstallRoutes();

  Config config_;
  Runtime runtime_;
  std::optional<VectorStore> store_;
  std::unique_ptr<Monitor> monitor_;
  // Bounds concurrent checks, each of which may sample the target agent.
  std::counting_semaphore<> in_flight_;
  std::unique_ptr<httplib::Server> server_;
};

// The verdict line shared by `halmit check` and the service.
std::string VerdictLine(const Verdict& verdict);

}  // namespace halmit::cli

#endif  // HALMIT_TOOLS_SERVICE_H_
