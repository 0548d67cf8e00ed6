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

#include "halmit/fractal_explorer.h"

#include <algorithm>
#include <cmath>
#include <deque>
#include <istream>
#include <map>
#include <ostream>
#include <random>
#include <set>
#include <unordered_map>

#include <spdlog/spdlog.h>

#include "halmit/error.h"
#include "halmit/evaluator.h"
#include "halmit/prompts.h"
#include "halmit/text.h"
#include "json.hpp"
#include "parallel.h"

namespace halmit {
namespace {

using nlohmann::json;

constexpr size_t kMaxFailureMessages = 20;

std::string Ask(ChatBackend& backend, const std::string& prompt, int sample_index) {
  const ChatTurn turn{Role::kUser, prompt};
  return Trim(backend.Complete(std::span<const ChatTurn>(&turn, 1), sample_index));
}

double UnitDraw(std::mt19937_64& rng) { return static_cast<double>(rng() >> 11) * 0x1.0p-53; }

TransformKind SampleKind(const TransformProbabilities& p, std::mt19937_64& rng) {
  const double u = UnitDraw(rng);
  double acc = 0.0;
  for (TransformKind kind : kAllTransforms) {
    acc += p[Index(kind)];
    if (u < acc) return kind;
  }
  // Rounding left u above the last partial sum; take the last kind with mass.
  for (size_t j = 3; j-- > 0;) {
    if (p[j] > 0.0) return kAllTransforms[j];
  }
  return TransformKind::kDeduction;
}

TransformProbabilities Restricted(const TransformProbabilities& p) {
  const double mass = p[0] + p[1];
  if (mass <= 0.0) return {0.5, 0.5, 0.0};
  return {p[0] / mass, p[1] / mass, 0.0};
}

json ProbabilitiesJson(const TransformProbabilities& p) { return json::array({p[0], p[1], p[2]}); }

TransformProbabilities ProbabilitiesFrom(const json& j) {
  TransformProbabilities p{};
  if (!j.is_array() || j.size() != 3) throw Error(ErrorCode::kCorrupt, "expected three probabilities");
  for (size_t i = 0; i < 3; ++i) p[i] = j[i].get<double>();
  return p;
}

// A query waiting to be judged.
struct Node {
  std::string query;
  std::string root;
  std::string parent;
  int64_t parent_record = 0;
  std::optional<TransformKind> transform;
  double h_prev = 0.0;
  double r_prev = 1.0;
  TransformProbabilities probabilities = kUniformProbabilities;
  std::vector<double> state_features;
  int64_t group = -1;    // siblings expanded together in expand_all mode
  double priority = 0.0;  // parent entropy; low values are evicted first
};

struct Judged {
  std::string error;  // non-empty: the branch failed
  std::vector<std::string> responses;
  std::vector<Judgment> judgments;
  double entropy = 0.0;
  Vector embedding;
};

Judged JudgeNode(const Node& node, const ExploreAgents& agents, int k) {
  Judged out;
  try {
    out.embedding = agents.embedder->Embed(node.query);
    out.responses = SampleK(*agents.target, node.query, k);
    for (const auto& r : out.responses) out.judgments.push_back(Judge(node.query, r, *agents.judge));
    out.entropy = Entropy(Cluster(out.responses, *agents.oracle));
  } catch (const Error& e) {
    out.error = e.what();
  }
  return out;
}

// A child to generate after a round.
struct Expansion {
  Node node;
  bool fresh = false;
  TransformKind kind = TransformKind::kDeduction;
  int slot = 0;
  std::string variant;
};

class GammaTracker {
 public:
  explicit GammaTracker(int window) : window_(window) {}
  void Add(bool hallucinated) {
    ++total_;
    hallucinated_ += hallucinated ? 1 : 0;
    if (window_ > 0) {
      recent_.push_back(hallucinated);
      recent_hallucinated_ += hallucinated ? 1 : 0;
      if (static_cast<int>(recent_.size()) > window_) {
        recent_hallucinated_ -= recent_.front() ? 1 : 0;
        recent_.pop_front();
      }
    }
  }
  double gamma() const {
    if (window_ > 0) return HallucinationRatio(recent_hallucinated_, static_cast<int64_t>(recent_.size()));
    return HallucinationRatio(hallucinated_, total_);
  }
  int64_t total() const { return total_; }
  int64_t hallucinated() const { return hallucinated_; }

 private:
  int window_;
  int64_t total_ = 0;
  int64_t hallucinated_ = 0;
  std::deque<bool> recent_;
  int64_t recent_hallucinated_ = 0;
};

}  // namespace

void IFSPConfig::Validate() const {
  double sum = 0.0;
  for (double p : probabilities) {
    if (!(p >= 0.0) || !std::isfinite(p)) throw Error(ErrorCode::kConfig, "probabilities must be >= 0");
    sum += p;
  }
  if (std::abs(sum - 1.0) > 1e-9) throw Error(ErrorCode::kConfig, "probabilities must sum to 1");
  if (restrict_on_hallucination && probabilities[0] + probabilities[1] <= 0.0) {
    throw Error(ErrorCode::kConfig, "restricted expansion needs deduction or analogy mass");
  }
  if (samples_per_query < 2) throw Error(ErrorCode::kConfig, "samples_per_query must be >= 2");
  if (!(gamma_stop > 0.0 && gamma_stop <= 1.0)) throw Error(ErrorCode::kConfig, "gamma_stop must lie in (0, 1]");
  if (max_iterations < 1) throw Error(ErrorCode::kConfig, "max_iterations must be positive");
  if (max_queries < 0) throw Error(ErrorCode::kConfig, "max_queries must be >= 0");
  if (seeds_per_domain < 1) throw Error(ErrorCode::kConfig, "seeds_per_domain must be positive");
  if (branch_width < 1) throw Error(ErrorCode::kConfig, "branch_width must be positive");
  if (frontier_limit < 1) throw Error(ErrorCode::kConfig, "frontier_limit must be positive");
  if (!(omega > 0.0)) throw Error(ErrorCode::kConfig, "omega must be positive");
  if (gamma_window < 0) throw Error(ErrorCode::kConfig, "gamma_window must be >= 0");
  if (workers < 1) throw Error(ErrorCode::kConfig, "workers must be positive");
}

std::string_view TerminationName(Termination t) {
  return t == Termination::kGamma ? "gamma" : "max_iterations";
}

std::string ReportToJson(const ExplorationReport& r) {
  json entropy = json::array();
  for (const auto& [round, h] : r.entropy_trajectory) entropy.push_back(json::array({round, h}));
  json usage = json::object();
  for (TransformKind kind : kAllTransforms) usage[std::string(TransformName(kind))] = r.transform_usage[Index(kind)];
  json j = {{"domain", r.domain},
            {"boundary_count", r.boundary_count},
            {"gamma_trajectory", r.gamma_trajectory},
            {"entropy_trajectory", entropy},
            {"transform_usage", usage},
            {"terminated_by", TerminationName(r.terminated_by)},
            {"rounds", r.rounds},
            {"queries_judged", r.queries_judged},
            {"answers_judged", r.answers_judged},
            {"answers_hallucinated", r.answers_hallucinated},
            {"low_confidence_judgments", r.low_confidence_judgments},
            {"failed_branches", r.failed_branches},
            {"failures", r.failures}};
  return j.dump(2);
}

std::string EventToJson(const ExploreEvent& e) {
  json j = {{"round", e.round},
            {"query", e.query},
            {"root", e.root},
            {"parent", e.parent},
            {"transform", e.transform ? json(TransformName(*e.transform)) : json(nullptr)},
            {"responses", e.responses},
            {"verdicts", e.verdicts},
            {"confidences", e.confidences},
            {"h_prev", e.h_prev},
            {"h_cur", e.h_cur},
            {"sig_product", e.sig_product},
            {"r_prev", e.r_prev},
            {"reward", e.reward},
            {"probabilities", ProbabilitiesJson(e.probabilities)},
            {"p_target", ProbabilitiesJson(e.p_target)},
            {"state_features", e.state_features},
            {"record_id", e.record_id},
            {"gamma", e.gamma}};
  return j.dump();
}

ExploreEvent EventFromJson(std::string_view line) {
  try {
    const json j = json::parse(line);
    ExploreEvent e;
    e.round = j.at("round").get<int>();
    e.query = j.at("query").get<std::string>();
    e.root = j.at("root").get<std::string>();
    e.parent = j.at("parent").get<std::string>();
    if (!j.at("transform").is_null()) {
      e.transform = ParseTransform(j.at("transform").get<std::string>());
      if (!e.transform) throw Error(ErrorCode::kCorrupt, "unknown transform in event");
    }
    e.responses = j.at("responses").get<std::vector<std::string>>();
    e.verdicts = j.at("verdicts").get<std::vector<bool>>();
    e.confidences = j.at("confidences").get<std::vector<double>>();
    e.h_prev = j.at("h_prev").get<double>();
    e.h_cur = j.at("h_cur").get<double>();
    e.sig_product = j.at("sig_product").get<int>();
    e.r_prev = j.at("r_prev").get<double>();
    e.reward = j.at("reward").get<double>();
    e.probabilities = ProbabilitiesFrom(j.at("probabilities"));
    e.p_target = ProbabilitiesFrom(j.at("p_target"));
    e.state_features = j.at("state_features").get<std::vector<double>>();
    e.record_id = j.at("record_id").get<int64_t>();
    e.gamma = j.at("gamma").get<double>();
    return e;
  } catch (const json::exception& ex) {
    throw Error(ErrorCode::kCorrupt, std::string("bad event line: ") + ex.what());
  }
}

std::vector<PolicySample> PolicySamplesFromEvents(const std::vector<ExploreEvent>& events) {
  std::vector<PolicySample> out;
  for (const auto& e : events) {
    if (!e.transform) continue;
    out.push_back(PolicySample{e.query, e.responses, e.h_prev, e.h_cur, e.sig_product, e.reward,
                               e.p_target, e.state_features, *e.transform});
  }
  return out;
}

std::vector<PolicySample> ReadPolicySamples(std::istream& event_log) {
  std::vector<ExploreEvent> events;
  std::string line;
  while (std::getline(event_log, line)) {
    if (!Trim(line).empty()) events.push_back(EventFromJson(line));
  }
  return PolicySamplesFromEvents(events);
}

std::vector<std::string> SeedQueries(std::string_view domain, int n, ChatBackend& generator,
                                     uint64_t stream) {
  if (n < 1) throw Error(ErrorCode::kInvalidArgument, "seed count must be positive");
  std::vector<std::string> seeds;
  std::set<std::string> seen;
  int counter = 0;
  // One initial batch plus three regeneration rounds.
  for (int round = 0; round < 4 && static_cast<int>(seeds.size()) < n; ++round) {
    const int missing = n - static_cast<int>(seeds.size());
    for (int i = 0; i < missing; ++i, ++counter) {
      const std::string variant = std::to_string(stream) + "-" + std::to_string(counter);
      const std::string prompt =
          RenderPrompt(PromptTemplate(PromptId::kSeed), {{"domain", domain}, {"variant", variant}});
      std::string q = Ask(generator, prompt, counter);
      if (!q.empty() && seen.insert(q).second) seeds.push_back(std::move(q));
    }
  }
  if (static_cast<int>(seeds.size()) < n) {
    throw Error(ErrorCode::kDegenerate, "generator produced " + std::to_string(seeds.size()) +
                                            " distinct seeds, wanted " + std::to_string(n));
  }
  return seeds;
}

std::string TransformQuery(std::string_view parent, TransformKind kind, ChatBackend& generator,
                           int slot) {
  if (Trim(parent).empty()) throw Error(ErrorCode::kInvalidArgument, "empty parent query");
  PromptId id = PromptId::kDeduction;
  if (kind == TransformKind::kAnalogy) id = PromptId::kAnalogy;
  if (kind == TransformKind::kInduction) id = PromptId::kInduction;
  const std::string prompt = RenderPrompt(PromptTemplate(id), {{"query", parent}});
  const std::string trimmed_parent = Trim(parent);
  for (int attempt = 0; attempt < 2; ++attempt) {
    std::string child = Ask(generator, prompt, 2 * slot + attempt);
    if (!child.empty() && child != trimmed_parent) return child;
  }
  throw Error(ErrorCode::kDegenerate,
              std::string(TransformName(kind)) + " returned the parent query twice");
}

std::string FreshQuery(std::string_view domain, std::string_view variant, ChatBackend& generator) {
  const std::string prompt =
      RenderPrompt(PromptTemplate(PromptId::kFresh), {{"domain", domain}, {"variant", variant}});
  std::string q = Ask(generator, prompt, 0);
  if (q.empty()) throw Error(ErrorCode::kDegenerate, "generator returned an empty query");
  return q;
}

double HallucinationRatio(int64_t hallucinated, int64_t total) {
  if (total < 0 || hallucinated < 0 || hallucinated > total) {
    throw Error(ErrorCode::kInvalidArgument, "invalid hallucination counts");
  }
  return total == 0 ? 0.0 : static_cast<double>(hallucinated) / static_cast<double>(total);
}

ExplorationReport Explore(std::string_view domain, const ExploreAgents& agents, VectorStore& store,
                          const ValueNetwork* policy, const IFSPConfig& config,
                          std::ostream* event_log) {
  config.Validate();
  if (!agents.target || !agents.generator || !agents.judge || !agents.oracle || !agents.embedder) {
    throw Error(ErrorCode::kInvalidArgument, "exploration needs every agent role");
  }
  if (agents.embedder->dimension() != store.dimension()) {
    throw Error(ErrorCode::kDimensionMismatch, "store dimension does not match the embedder");
  }

  ExplorationReport report;
  report.domain = std::string(domain);
  std::mt19937_64 rng(MixSeed(config.seed ^ Fnv1a64(domain)));
  GammaTracker gamma(config.gamma_window);
  std::unordered_map<std::string, Vector> root_embeddings;
  int64_t fresh_counter = 0;
  int64_t next_group = 0;

  auto note_failure = [&report](const std::string& message) {
    ++report.failed_branches;
    if (report.failures.size() < kMaxFailureMessages) report.failures.push_back(message);
    spdlog::warn("exploration branch failed: {}", message);
  };

  std::vector<Node> frontier;
  for (auto& q : SeedQueries(domain, config.seeds_per_domain, *agents.generator, config.seed)) {
    Node n;
    n.root = q;
    n.query = std::move(q);
    n.probabilities = config.probabilities;
    frontier.push_back(std::move(n));
  }

  for (int round = 1; round <= config.max_iterations && !frontier.empty(); ++round) {
    if (config.max_queries > 0) {
      const int64_t left = config.max_queries - report.queries_judged;
      if (left <= 0) break;
      if (static_cast<int64_t>(frontier.size()) > left) frontier.resize(static_cast<size_t>(left));
    }
    report.rounds = round;

    std::vector<Judged> judged(frontier.size());
    internal::ParallelFor(frontier.size(), config.workers, [&](size_t i) {
      judged[i] = JudgeNode(frontier[i], agents, config.samples_per_query);
    });

    std::vector<ExploreEvent> events;
    std::vector<Expansion> expansions;
    for (size_t i = 0; i < frontier.size(); ++i) {
      const Node& node = frontier[i];
      Judged& result = judged[i];
      if (!result.error.empty()) {
        note_failure(result.error);
        continue;
      }
      ++report.queries_judged;
      ExploreEvent e;
      e.round = round;
      e.query = node.query;
      e.root = node.root;
      e.parent = node.parent;
      e.transform = node.transform;
      for (const auto& j : result.judgments) {
        gamma.Add(j.hallucinated);
        e.verdicts.push_back(j.hallucinated);
        e.confidences.push_back(j.confidence);
        report.low_confidence_judgments += j.low_confidence ? 1 : 0;
      }
      e.h_prev = node.h_prev;
      e.h_cur = result.entropy;
      e.sig_product = SigProduct(result.judgments);
      e.r_prev = node.r_prev;
      e.reward = Reward(node.h_prev, result.entropy, e.sig_product, node.r_prev);
      e.probabilities = node.probabilities;
      e.p_target = node.probabilities;
      e.state_features = node.state_features;
      e.gamma = gamma.gamma();
      report.entropy_trajectory.emplace_back(round, result.entropy);

      if (e.sig_product == 0) {
        BoundaryRecord record;
        record.domain = std::string(domain);
        record.query = node.query;
        record.responses = result.responses;
        record.semantic_entropy = result.entropy;
        record.embedding.assign(result.embedding.begin(), result.embedding.end());
        record.hallucinated = true;
        if (node.parent_record > 0 && node.transform) {
          record.lineage = Lineage{node.parent_record, *node.transform};
        }
        record.iteration = round;
        e.record_id = store.Insert(std::move(record));
        ++report.boundary_count;

        auto [it, inserted] = root_embeddings.try_emplace(node.root);
        if (inserted) it->second = agents.embedder->Embed(node.root);
        const double drift = node.root == node.query ? 0.0 : 1.0 - Dot(it->second, result.embedding);
        const StateFeatures state = ComputeStateFeatures(drift, result.entropy, config.omega);
        TransformProbabilities p =
            policy != nullptr ? SelectProbabilities(*policy, state.values) : config.probabilities;
        if (config.restrict_on_hallucination) p = Restricted(p);

        Node child;
        child.root = node.root;
        child.parent = node.query;
        child.parent_record = e.record_id;
        child.h_prev = result.entropy;
        child.r_prev = e.reward;
        child.probabilities = p;
        child.state_features = state.values;
        child.priority = result.entropy;
        if (config.expand_all_transforms) {
          child.group = next_group++;
          for (TransformKind kind : kAllTransforms) {
            if (config.restrict_on_hallucination && kind == TransformKind::kInduction) continue;
            expansions.push_back({child, false, kind, static_cast<int>(Index(kind)), {}});
          }
        } else {
          for (int s = 0; s < config.branch_width; ++s) {
            expansions.push_back({child, false, SampleKind(p, rng), s, {}});
          }
        }
      } else {
        Node fresh;
        fresh.probabilities = config.probabilities;
        expansions.push_back(
            {fresh, true, TransformKind::kDeduction, 0,
             "fresh-" + std::to_string(config.seed) + "-" + std::to_string(fresh_counter++)});
      }
      events.push_back(std::move(e));
    }
    report.answers_judged = gamma.total();
    report.answers_hallucinated = gamma.hallucinated();

    // Complete sibling groups give an exact probability target.
    std::map<int64_t, std::vector<size_t>> groups;
    for (size_t i = 0, ev = 0; i < frontier.size(); ++i) {
      if (!judged[i].error.empty()) continue;
      if (frontier[i].group >= 0) groups[frontier[i].group].push_back(ev);
      ++ev;
    }
    for (const auto& [group, members] : groups) {
      std::array<double, 3> rewards{};
      std::array<bool, 3> seen{};
      for (size_t m : members) {
        const size_t j = Index(*events[m].transform);
        rewards[j] = events[m].reward;
        seen[j] = true;
      }
      if (!(seen[0] && seen[1] && seen[2])) continue;
      const TransformProbabilities target = ProbabilitiesFromRewards(rewards);
      for (size_t m : members) events[m].p_target = target;
    }
    if (event_log != nullptr) {
      for (const auto& e : events) *event_log << EventToJson(e) << '\n';
    }

    report.gamma_trajectory.push_back(gamma.gamma());
    if (gamma.gamma() > config.gamma_stop) {
      report.terminated_by = Termination::kGamma;
      break;
    }
    if (round == config.max_iterations) break;

    std::vector<std::string> children(expansions.size());
    std::vector<std::string> errors(expansions.size());
    internal::ParallelFor(expansions.size(), config.workers, [&](size_t i) {
      const Expansion& x = expansions[i];
      try {
        children[i] = x.fresh ? FreshQuery(domain, x.variant, *agents.generator)
                              : TransformQuery(x.node.parent, x.kind, *agents.generator, x.slot);
      } catch (const Error& e) {
        errors[i] = e.what();
      }
    });
    std::vector<Node> next;
    for (size_t i = 0; i < expansions.size(); ++i) {
      if (!errors[i].empty()) {
        note_failure(errors[i]);
        continue;
      }
      Node n = std::move(expansions[i].node);
      n.query = std::move(children[i]);
      if (expansions[i].fresh) {
        n.root = n.query;
      } else {
        n.transform = expansions[i].kind;
        ++report.transform_usage[Index(expansions[i].kind)];
      }
      next.push_back(std::move(n));
    }
    std::stable_sort(next.begin(), next.end(),
                     [](const Node& a, const Node& b) { return a.priority > b.priority; });
    if (static_cast<int>(next.size()) > config.frontier_limit) {
      next.resize(static_cast<size_t>(config.frontier_limit));
    }
    frontier = std::move(next);
  }
  return report;
}

}  // namespace halmit
