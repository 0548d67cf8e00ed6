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

#include "halmit/config.h"

#include <algorithm>
#include <fstream>
#include <initializer_list>
#include <sstream>

#include "halmit/error.h"
#include "json.hpp"

namespace halmit {
namespace {

using nlohmann::json;

// Reads the keys of one JSON object, remembering which were consumed so the
// leftovers can be reported.
class Section {
 public:
  Section(const json& j, std::string path) : j_(j), path_(std::move(path)) {
    if (!j_.is_object()) throw Error(ErrorCode::kConfig, Where() + " must be an object");
  }

  template <typename T>
  void Read(const char* key, T& out) {
    auto it = j_.find(key);
    if (it == j_.end()) return;
    used_.push_back(key);
    try {
      out = it->template get<T>();
    } catch (const json::exception& e) {
      throw Error(ErrorCode::kConfig, Where() + "." + key + ": " + e.what());
    }
  }

  const json* Child(const char* key) {
    auto it = j_.find(key);
    if (it == j_.end()) return nullptr;
    used_.push_back(key);
    return &*it;
  }

  void Finish() const {
    for (auto it = j_.begin(); it != j_.end(); ++it) {
      if (std::find(used_.begin(), used_.end(), it.key()) == used_.end()) {
        throw Error(ErrorCode::kConfig, "unknown key '" + it.key() + "' in " + Where());
      }
    }
  }

 private:
  std::string Where() const { return path_.empty() ? "config" : path_; }

  const json& j_;
  std::string path_;
  std::vector<std::string> used_;
};

std::string_view BackendKindName(BackendKind kind) {
  switch (kind) {
    case BackendKind::kRemote: return "remote";
    case BackendKind::kScripted: return "scripted";
    case BackendKind::kSynthetic: return "synthetic";
  }
  return "scripted";
}

BackendKind ParseBackendKind(const std::string& s) {
  if (s == "remote") return BackendKind::kRemote;
  if (s == "scripted") return BackendKind::kScripted;
  if (s == "synthetic") return BackendKind::kSynthetic;
  throw Error(ErrorCode::kConfig, "unknown backend kind '" + s + "'");
}

std::string_view OracleKindName(OracleKind kind) {
  switch (kind) {
    case OracleKind::kLlmJudge: return "llm_judge";
    case OracleKind::kExactMatch: return "exact_match";
    case OracleKind::kTokenOverlap: return "token_overlap";
  }
  return "token_overlap";
}

OracleKind ParseOracleKind(const std::string& s) {
  if (s == "llm_judge") return OracleKind::kLlmJudge;
  if (s == "exact_match") return OracleKind::kExactMatch;
  if (s == "token_overlap") return OracleKind::kTokenOverlap;
  throw Error(ErrorCode::kConfig, "unknown oracle kind '" + s + "'");
}

json BackendToJson(const BackendSpec& b) {
  return {{"kind", BackendKindName(b.kind)},
          {"endpoint", b.endpoint},
          {"model_name", b.model_name},
          {"temperature", b.temperature},
          {"max_tokens", b.max_tokens},
          {"seed", b.seed ? json(*b.seed) : json(nullptr)},
          {"script", b.script},
          {"retry_attempts", b.retry_attempts},
          {"retry_backoff_ms", b.retry_backoff_ms}};
}

void ReadBackend(const json& j, const std::string& path, BackendSpec& b) {
  Section s(j, path);
  std::string kind(BackendKindName(b.kind));
  s.Read("kind", kind);
  b.kind = ParseBackendKind(kind);
  s.Read("endpoint", b.endpoint);
  s.Read("model_name", b.model_name);
  s.Read("temperature", b.temperature);
  s.Read("max_tokens", b.max_tokens);
  if (const json* seed = s.Child("seed")) {
    if (seed->is_null()) {
      b.seed.reset();
    } else if (seed->is_number_unsigned()) {
      b.seed = seed->get<uint64_t>();
    } else {
      throw Error(ErrorCode::kConfig, path + ".seed must be a non-negative integer or null");
    }
  }
  s.Read("script", b.script);
  s.Read("retry_attempts", b.retry_attempts);
  s.Read("retry_backoff_ms", b.retry_backoff_ms);
  s.Finish();
}

}  // namespace

GatewayConfig::GatewayConfig() {
  target.kind = BackendKind::kSynthetic;
  target.model_name = "target";
  generator.kind = BackendKind::kSynthetic;
  generator.model_name = "generator";
  judge.kind = BackendKind::kSynthetic;
  judge.model_name = "judge";
  judge.temperature = 0.0;
}

std::filesystem::path Config::Resolve(const std::string& path) const {
  const std::filesystem::path p(path);
  return p.is_absolute() || base_dir.empty() ? p : base_dir / p;
}

void Config::Validate() const {
  for (const BackendSpec* b : {&gateway.target, &gateway.generator, &gateway.judge}) {
    if (b->kind == BackendKind::kRemote && b->endpoint.empty()) {
      throw Error(ErrorCode::kConfig, "remote backend needs an endpoint");
    }
    if (b->kind == BackendKind::kSynthetic && gateway.world.empty()) {
      throw Error(ErrorCode::kConfig, "synthetic backend needs gateway.world");
    }
    if (b->temperature < 0.0) throw Error(ErrorCode::kConfig, "temperature must be >= 0");
    if (b->max_tokens < 1) throw Error(ErrorCode::kConfig, "max_tokens must be positive");
    if (b->retry_attempts < 1) throw Error(ErrorCode::kConfig, "retry_attempts must be positive");
  }
  if (gateway.embedding.dimension < 1) throw Error(ErrorCode::kConfig, "embedding dimension must be positive");
  if (gateway.embedding.kind == EmbeddingKind::kRemote && gateway.embedding.endpoint.empty()) {
    throw Error(ErrorCode::kConfig, "remote embedding needs an endpoint");
  }
  if (!(gateway.oracle.threshold > 0.0 && gateway.oracle.threshold <= 1.0)) {
    throw Error(ErrorCode::kConfig, "oracle threshold must lie in (0, 1]");
  }
  explore.Validate();
  monitor.Validate();
  if (policy.train.learning_rate <= 0.0 || policy.train.batch_size < 1 || policy.train.max_epochs < 0) {
    throw Error(ErrorCode::kConfig, "invalid policy training settings");
  }
  if (benchmark.n_eval < 2 || benchmark.workers < 1) throw Error(ErrorCode::kConfig, "invalid benchmark settings");
  if (sweep.parameter != "gamma_stop" && sweep.parameter != "epsilon_sim") {
    throw Error(ErrorCode::kConfig, "sweep.parameter must be gamma_stop or epsilon_sim");
  }
  if (convergence.runs < 1 || convergence.final_steps < 1 || convergence.collect_queries < 1) {
    throw Error(ErrorCode::kConfig, "invalid convergence settings");
  }
  if (service.port < 0 || service.port > 65535 || service.max_in_flight < 1) {
    throw Error(ErrorCode::kConfig, "invalid service settings");
  }
}

Config ParseConfig(std::string_view json_text) {
  json j;
  try {
    j = json::parse(json_text);
  } catch (const json::exception& e) {
    throw Error(ErrorCode::kConfig, std::string("config is not valid JSON: ") + e.what());
  }
  Config c;
  Section root(j, "");
  root.Read("domain", c.domain);

  if (const json* g = root.Child("gateway")) {
    Section s(*g, "gateway");
    if (const json* b = s.Child("target")) ReadBackend(*b, "gateway.target", c.gateway.target);
    if (const json* b = s.Child("generator")) ReadBackend(*b, "gateway.generator", c.gateway.generator);
    if (const json* b = s.Child("judge")) ReadBackend(*b, "gateway.judge", c.gateway.judge);
    if (const json* e = s.Child("embedding")) {
      Section es(*e, "gateway.embedding");
      std::string kind = c.gateway.embedding.kind == EmbeddingKind::kHashed ? "hashed" : "remote";
      es.Read("kind", kind);
      if (kind != "hashed" && kind != "remote") throw Error(ErrorCode::kConfig, "unknown embedding kind '" + kind + "'");
      c.gateway.embedding.kind = kind == "hashed" ? EmbeddingKind::kHashed : EmbeddingKind::kRemote;
      es.Read("dimension", c.gateway.embedding.dimension);
      es.Read("endpoint", c.gateway.embedding.endpoint);
      es.Read("model_name", c.gateway.embedding.model_name);
      es.Finish();
    }
    if (const json* o = s.Child("oracle")) {
      Section os(*o, "gateway.oracle");
      std::string kind(OracleKindName(c.gateway.oracle.kind));
      os.Read("kind", kind);
      c.gateway.oracle.kind = ParseOracleKind(kind);
      os.Read("threshold", c.gateway.oracle.threshold);
      os.Finish();
    }
    s.Read("world", c.gateway.world);
    s.Finish();
  }

  if (const json* e = root.Child("explore")) {
    Section s(*e, "explore");
    IFSPConfig& x = c.explore;
    s.Read("probabilities", x.probabilities);
    s.Read("samples_per_query", x.samples_per_query);
    s.Read("gamma_stop", x.gamma_stop);
    s.Read("max_iterations", x.max_iterations);
    s.Read("max_queries", x.max_queries);
    s.Read("seeds_per_domain", x.seeds_per_domain);
    s.Read("branch_width", x.branch_width);
    s.Read("frontier_limit", x.frontier_limit);
    s.Read("restrict_on_hallucination", x.restrict_on_hallucination);
    s.Read("expand_all_transforms", x.expand_all_transforms);
    s.Read("omega", x.omega);
    s.Read("gamma_window", x.gamma_window);
    s.Read("workers", x.workers);
    s.Read("seed", x.seed);
    s.Finish();
  }

  if (const json* p = root.Child("policy")) {
    Section s(*p, "policy");
    s.Read("learning_rate", c.policy.train.learning_rate);
    s.Read("batch_size", c.policy.train.batch_size);
    s.Read("max_epochs", c.policy.train.max_epochs);
    s.Read("rng_seed", c.policy.train.rng_seed);
    s.Read("guide_exploration", c.policy.guide_exploration);
    s.Finish();
  }

  if (const json* m = root.Child("monitor")) {
    Section s(*m, "monitor");
    s.Read("epsilon_sim", c.monitor.epsilon_sim);
    s.Read("k_retrieve", c.monitor.k_retrieve);
    s.Read("k_entropy", c.monitor.k_entropy);
    s.Finish();
  }

  if (const json* p = root.Child("paths")) {
    Section s(*p, "paths");
    s.Read("store", c.paths.store);
    s.Read("checkpoint", c.paths.checkpoint);
    s.Read("event_log", c.paths.event_log);
    s.Read("report", c.paths.report);
    s.Read("loss_curve", c.paths.loss_curve);
    s.Read("entropy_plot", c.paths.entropy_plot);
    s.Read("sweep", c.paths.sweep);
    s.Read("convergence", c.paths.convergence);
    s.Finish();
  }

  if (const json* b = root.Child("benchmark")) {
    Section s(*b, "benchmark");
    s.Read("n_eval", c.benchmark.n_eval);
    s.Read("seed", c.benchmark.seed);
    s.Read("workers", c.benchmark.workers);
    s.Finish();
  }

  if (const json* w = root.Child("sweep")) {
    Section s(*w, "sweep");
    s.Read("parameter", c.sweep.parameter);
    s.Read("values", c.sweep.values);
    s.Finish();
  }

  if (const json* v = root.Child("convergence")) {
    Section s(*v, "convergence");
    s.Read("runs", c.convergence.runs);
    s.Read("final_steps", c.convergence.final_steps);
    s.Read("collect_queries", c.convergence.collect_queries);
    s.Finish();
  }

  if (const json* v = root.Child("service")) {
    Section s(*v, "service");
    s.Read("host", c.service.host);
    s.Read("port", c.service.port);
    s.Read("max_in_flight", c.service.max_in_flight);
    s.Finish();
  }
  root.Finish();
  c.Validate();
  return c;
}

Config LoadConfig(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw Error(ErrorCode::kConfig, "cannot read config " + path.string());
  std::stringstream buf;
  buf << in.rdbuf();
  Config c = ParseConfig(buf.str());
  c.base_dir = path.parent_path();
  return c;
}

std::string SerializeConfig(const Config& c) {
  const IFSPConfig& x = c.explore;
  json j = {
      {"domain", c.domain},
      {"gateway",
       {{"target", BackendToJson(c.gateway.target)},
        {"generator", BackendToJson(c.gateway.generator)},
        {"judge", BackendToJson(c.gateway.judge)},
        {"embedding",
         {{"kind", c.gateway.embedding.kind == EmbeddingKind::kHashed ? "hashed" : "remote"},
          {"dimension", c.gateway.embedding.dimension},
          {"endpoint", c.gateway.embedding.endpoint},
          {"model_name", c.gateway.embedding.model_name}}},
        {"oracle", {{"kind", OracleKindName(c.gateway.oracle.kind)}, {"threshold", c.gateway.oracle.threshold}}},
        {"world", c.gateway.world}}},
      {"explore",
       {{"probabilities", x.probabilities},
        {"samples_per_query", x.samples_per_query},
        {"gamma_stop", x.gamma_stop},
        {"max_iterations", x.max_iterations},
        {"max_queries", x.max_queries},
        {"seeds_per_domain", x.seeds_per_domain},
        {"branch_width", x.branch_width},
        {"frontier_limit", x.frontier_limit},
        {"restrict_on_hallucination", x.restrict_on_hallucination},
        {"expand_all_transforms", x.expand_all_transforms},
        {"omega", x.omega},
        {"gamma_window", x.gamma_window},
        {"workers", x.workers},
        {"seed", x.seed}}},
      {"policy",
       {{"learning_rate", c.policy.train.learning_rate},
        {"batch_size", c.policy.train.batch_size},
        {"max_epochs", c.policy.train.max_epochs},
        {"rng_seed", c.policy.train.rng_seed},
        {"guide_exploration", c.policy.guide_exploration}}},
      {"monitor",
       {{"epsilon_sim", c.monitor.epsilon_sim},
        {"k_retrieve", c.monitor.k_retrieve},
        {"k_entropy", c.monitor.k_entropy}}},
      {"paths",
       {{"store", c.paths.store},
        {"checkpoint", c.paths.checkpoint},
        {"event_log", c.paths.event_log},
        {"report", c.paths.report},
        {"loss_curve", c.paths.loss_curve},
        {"entropy_plot", c.paths.entropy_plot},
        {"sweep", c.paths.sweep},
        {"convergence", c.paths.convergence}}},
      {"benchmark", {{"n_eval", c.benchmark.n_eval}, {"seed", c.benchmark.seed}, {"workers", c.benchmark.workers}}},
      {"sweep", {{"parameter", c.sweep.parameter}, {"values", c.sweep.values}}},
      {"convergence",
       {{"runs", c.convergence.runs},
        {"final_steps", c.convergence.final_steps},
        {"collect_queries", c.convergence.collect_queries}}},
      {"service",
       {{"host", c.service.host}, {"port", c.service.port}, {"max_in_flight", c.service.max_in_flight}}}};
  return j.dump(2);
}

SyntheticWorldSpec ParseWorldSpec(std::string_view json_text) {
  json j;
  try {
    j = json::parse(json_text);
  } catch (const json::exception& e) {
    throw Error(ErrorCode::kConfig, std::string("world is not valid JSON: ") + e.what());
  }
  SyntheticWorldSpec w;
  Section s(j, "world");
  s.Read("dimension", w.dimension);
  s.Read("noise_seed", w.noise_seed);
  if (const json* regions = s.Child("regions")) {
    if (!regions->is_array()) throw Error(ErrorCode::kConfig, "world.regions must be an array");
    for (size_t i = 0; i < regions->size(); ++i) {
      RegionSpec r;
      Section rs((*regions)[i], "world.regions[" + std::to_string(i) + "]");
      rs.Read("anchor_words", r.anchor_words);
      rs.Read("center", r.center);
      rs.Read("radius", r.radius);
      rs.Read("competent", r.competent);
      rs.Finish();
      w.regions.push_back(std::move(r));
    }
  }
  if (const json* sched = s.Child("schedule")) {
    Section ss(*sched, "world.schedule");
    ss.Read("max_extra_clusters", w.schedule.max_extra_clusters);
    ss.Read("ramp", w.schedule.ramp);
    ss.Finish();
  }
  s.Read("filler_vocabulary", w.filler_vocabulary);
  s.Read("distractor_vocabulary", w.distractor_vocabulary);
  s.Read("distractor_length", w.distractor_length);
  s.Read("fresh_max_replacements", w.fresh_max_replacements);
  s.Finish();
  if (w.dimension < 1 || w.regions.empty() || w.schedule.max_extra_clusters < 1 || !(w.schedule.ramp > 0.0) ||
      w.filler_vocabulary < 1 || w.distractor_length < 1) {
    throw Error(ErrorCode::kConfig, "invalid synthetic world");
  }
  return w;
}

SyntheticWorldSpec LoadWorldSpec(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw Error(ErrorCode::kConfig, "cannot read world " + path.string());
  std::stringstream buf;
  buf << in.rdbuf();
  return ParseWorldSpec(buf.str());
}

std::string SerializeWorldSpec(const SyntheticWorldSpec& w) {
  json regions = json::array();
  for (const auto& r : w.regions) {
    regions.push_back({{"anchor_words", r.anchor_words},
                       {"center", r.center},
                       {"radius", r.radius},
                       {"competent", r.competent}});
  }
  json j = {{"dimension", w.dimension},
            {"noise_seed", w.noise_seed},
            {"regions", regions},
            {"schedule", {{"max_extra_clusters", w.schedule.max_extra_clusters}, {"ramp", w.schedule.ramp}}},
            {"filler_vocabulary", w.filler_vocabulary},
            {"distractor_vocabulary", w.distractor_vocabulary},
            {"distractor_length", w.distractor_length},
            {"fresh_max_replacements", w.fresh_max_replacements}};
  return j.dump(2);
}

}  // namespace halmit
