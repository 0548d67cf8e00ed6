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

// A synthetic agent with analytically known competence. Competence regions
// are cosine balls in the hashed embedding space; a query is answered
// faithfully iff it falls inside one of them, which makes the membership
// test a ground-truth hallucination label.
//
// Queries produced by the synthetic generator are bags of words: the anchor
// words of a region plus "filler" pseudo-words. Replacing anchors by fillers
// moves a query away from the region's center, so the three transformations
// have predictable geometric effects:
//   deduction  swaps half of the words foreign to the nearest competent
//              topic, rounded up, for its missing anchors (inward),
//   analogy    replaces one word with a filler (sideways, or one step out),
//   induction  replaces up to two anchors with fillers (outward).

#ifndef HALMIT_SYNTHETIC_WORLD_H_
#define HALMIT_SYNTHETIC_WORLD_H_

#include <cstdint>
#include <memory>
#include <random>
#include <span>
#include <string>
#include <string_view>
#include <utility>
#include <vector>

#include "halmit/chat.h"
#include "halmit/embedding.h"
#include "halmit/transform.h"

namespace halmit {

// Outside competence the agent answers with one of `c` distinct distractors,
//   c = 1 + ceil(max_extra_clusters * min(1, margin / ramp)),
// where margin is the cosine distance beyond the nearest region's radius.
// Sample i of a batch gets distractor (offset + i) mod c, so K samples split
// into c clusters whose sizes differ by at most one.
struct DistractorSchedule {
  int max_extra_clusters = 4;
  double ramp = 0.8;
};

// A topic of the generator. Competent topics also define a competence
// ball; the agent knows nothing about the others.
struct RegionSpec {
  std::vector<std::string> anchor_words;  // drives the generator
  Vector center;                          // empty: embedding of the anchor words
  double radius = 0.3;                    // cosine distance, in (0, 2)
  bool competent = true;
};

struct SyntheticWorldSpec {
  int dimension = 32;
  uint64_t noise_seed = 0;
  std::vector<RegionSpec> regions;
  DistractorSchedule schedule;
  int filler_vocabulary = 400;
  int distractor_vocabulary = 400;
  int distractor_length = 5;  // words per distractor answer
  // Fresh random queries replace up to this many anchors by fillers;
  // negative means up to all of them.
  int fresh_max_replacements = -1;
};

class SyntheticWorld {
 public:
  explicit SyntheticWorld(SyntheticWorldSpec spec);

  const SyntheticWorldSpec& spec() const { return spec_; }
  int dimension() const { return spec_.dimension; }
  // Competence balls, in the order of the competent regions of the spec.
  size_t region_count() const { return centers_.size(); }
  const Vector& center(size_t ball) const { return centers_[ball]; }
  double radius(size_t ball) const { return spec_.regions[ball_regions_[ball]].radius; }
  const Embedder& embedder() const { return embedder_; }
  const std::vector<std::string>& filler_words() const { return fillers_; }

  // Cosine distance to the ball's center minus its radius.
  double Margin(std::span<const double> v, size_t ball) const;
  // Ball with the smallest margin, and that margin.
  std::pair<size_t, double> Nearest(std::span<const double> v) const;

  // Ground-truth predicate: within the radius of some center.
  bool InCompetence(std::span<const double> v) const;
  bool InCompetence(std::string_view query) const;

  // Number of distinct replies for a query at `margin`; 1 inside competence.
  int DistractorClusters(double margin) const;

  std::string FaithfulAnswer(size_t ball) const;
  // Reply of the synthetic agent. Pure function of (world, query, index).
  std::string TargetReply(std::string_view query, int sample_index) const;
  bool IsFaithful(std::string_view query, std::string_view response) const;

  // Generator. `stream` selects the random draw. Seeds come from competent
  // topics only; random queries from any topic.
  std::string SeedQuery(uint64_t stream) const;
  std::string RandomQuery(uint64_t stream) const;
  std::string Transform(std::string_view parent, TransformKind kind, uint64_t stream) const;

 private:
  size_t RegionOfWords(const std::vector<std::string>& words) const;
  bool IsAnchor(size_t region, const std::string& word) const;
  std::string PickFiller(const std::vector<std::string>& exclude, std::mt19937_64& rng) const;

  SyntheticWorldSpec spec_;
  HashedEmbedder embedder_;
  std::vector<Vector> centers_;
  std::vector<size_t> ball_regions_;  // spec region of each ball
  std::vector<std::string> fillers_;
  std::vector<std::string> distractors_;
};

// Roles: "target", "generator", "judge".
std::unique_ptr<ChatBackend> MakeSyntheticBackend(const SyntheticWorld& world,
                                                  std::string_view role);

}  // namespace halmit

#endif  // HALMIT_SYNTHETIC_WORLD_H_
