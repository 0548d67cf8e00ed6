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

// Probabilistic fractal exploration of an agent's generalization bound.
//
// Exploration proceeds in breadth-first rounds. Every query of the frontier
// is answered K times by the target agent, each answer is judged, and the
// semantic entropy of the answers is computed. A query with at least one
// hallucinated answer becomes a boundary record and is expanded with
// transformed children; a clean query is replaced by a fresh random query.
// The run stops once the ratio of hallucinated answers exceeds gamma_stop.

#ifndef HALMIT_FRACTAL_EXPLORER_H_
#define HALMIT_FRACTAL_EXPLORER_H_

#include <array>
#include <cstdint>
#include <iosfwd>
#include <optional>
#include <string>
#include <string_view>
#include <utility>
#include <vector>

#include "halmit/chat.h"
#include "halmit/embedding.h"
#include "halmit/policy.h"
#include "halmit/semantic_entropy.h"
#include "halmit/transform.h"
#include "halmit/vector_store.h"

namespace halmit {

struct IFSPConfig {
  TransformProbabilities probabilities = kUniformProbabilities;
  int samples_per_query = 5;  // K
  double gamma_stop = 0.6;    // 1 disables the gamma criterion
  int max_iterations = 50;    // rounds
  int max_queries = 0;        // judged queries over the run; 0 = unbounded
  int seeds_per_domain = 10;
  int branch_width = 3;
  int frontier_limit = 64;
  // Expand hallucinated queries with deduction and analogy only.
  bool restrict_on_hallucination = false;
  // Expand every hallucinated query once with each transformation instead
  // of sampling; sibling rewards then give complete probability targets.
  bool expand_all_transforms = false;
  double omega = 0.5;
  // 0: gamma over the whole run; N > 0: over the last N judged answers.
  int gamma_window = 0;
  int workers = 1;
  uint64_t seed = 0;

  // Throws kConfig.
  void Validate() const;
};

enum class Termination { kGamma, kMaxIterations };
std::string_view TerminationName(Termination t);

struct ExplorationReport {
  std::string domain;
  int64_t boundary_count = 0;
  std::vector<double> gamma_trajectory;                  // one value per round
  std::vector<std::pair<int, double>> entropy_trajectory;  // (round, H) per judged query
  std::array<int64_t, 3> transform_usage = {0, 0, 0};
  Termination terminated_by = Termination::kMaxIterations;
  int rounds = 0;
  int64_t queries_judged = 0;
  int64_t answers_judged = 0;
  int64_t answers_hallucinated = 0;
  int64_t low_confidence_judgments = 0;
  int64_t failed_branches = 0;
  std::vector<std::string> failures;  // first messages, capped
};

std::string ReportToJson(const ExplorationReport& report);

// One judged query. The event log holds one per line.
struct ExploreEvent {
  int round = 0;
  std::string query;
  std::string root;    // seed or fresh query the branch started from
  std::string parent;  // empty for roots
  std::optional<TransformKind> transform;
  std::vector<std::string> responses;
  std::vector<bool> verdicts;  // per answer: hallucinated
  std::vector<double> confidences;
  double h_prev = 0.0;
  double h_cur = 0.0;
  int sig_product = 1;
  double r_prev = 1.0;
  double reward = 0.0;
  TransformProbabilities probabilities = kUniformProbabilities;  // used at the parent
  TransformProbabilities p_target = kUniformProbabilities;
  std::vector<double> state_features;  // of the parent state
  int64_t record_id = 0;               // 0 when nothing was stored
  double gamma = 0.0;                  // after this event
};

std::string EventToJson(const ExploreEvent& event);
ExploreEvent EventFromJson(std::string_view line);

// Samples for policy training: every event produced by a transformation.
std::vector<PolicySample> PolicySamplesFromEvents(const std::vector<ExploreEvent>& events);
std::vector<PolicySample> ReadPolicySamples(std::istream& event_log);

struct ExploreAgents {
  ChatBackend* target = nullptr;
  ChatBackend* generator = nullptr;
  ChatBackend* judge = nullptr;
  EquivalenceOracle* oracle = nullptr;
  const Embedder* embedder = nullptr;
};

// n distinct seed queries; duplicates are regenerated for up to three rounds.
// `stream` distinguishes runs.
std::vector<std::string> SeedQueries(std::string_view domain, int n, ChatBackend& generator,
                                     uint64_t stream = 0);

// A child query differing from `parent`; one reprompt, then kDegenerate.
// `slot` distinguishes several children of one parent.
std::string TransformQuery(std::string_view parent, TransformKind kind, ChatBackend& generator,
                           int slot = 0);

// A fresh random query for the domain; `variant` distinguishes draws.
std::string FreshQuery(std::string_view domain, std::string_view variant, ChatBackend& generator);

double HallucinationRatio(int64_t hallucinated, int64_t total);

// `policy` (optional) supplies per-state probabilities. `event_log`
// (optional) receives one JSON line per judged query. Backend failures mark
// the branch failed; store failures propagate.
ExplorationReport Explore(std::string_view domain, const ExploreAgents& agents, VectorStore& store,
                          const ValueNetwork* policy, const IFSPConfig& config,
                          std::ostream* event_log = nullptr);

}  // namespace halmit

#endif  // HALMIT_FRACTAL_EXPLORER_H_
