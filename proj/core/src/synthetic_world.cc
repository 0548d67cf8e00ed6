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

#include "halmit/synthetic_world.h"

#include <algorithm>
#include <cmath>
#include <set>

#include "halmit/error.h"
#include "halmit/prompts.h"
#include "halmit/text.h"

namespace halmit {
namespace {

constexpr uint64_t kFillerStream = 0x66696c6c6572ULL;
constexpr uint64_t kDistractorStream = 0x6469737472ULL;

std::vector<std::string> PseudoWords(int count, uint64_t seed, const std::set<std::string>& taken) {
  static constexpr std::string_view kConsonants = "bdfgklmnprstvz";
  static constexpr std::string_view kVowels = "aeiou";
  std::mt19937_64 rng(MixSeed(seed));
  std::set<std::string> seen = taken;
  std::vector<std::string> words;
  words.reserve(static_cast<size_t>(count));
  while (static_cast<int>(words.size()) < count) {
    const int syllables = 2 + static_cast<int>(rng() % 2);
    std::string word;
    for (int s = 0; s < syllables; ++s) {
      word.push_back(kConsonants[rng() % kConsonants.size()]);
      word.push_back(kVowels[rng() % kVowels.size()]);
    }
    if (rng() % 2) word.push_back(kConsonants[rng() % kConsonants.size()]);
    if (seen.insert(word).second) words.push_back(std::move(word));
  }
  return words;
}

std::string JoinWords(const std::vector<std::string>& words, std::string_view suffix) {
  std::string out;
  for (const auto& w : words) {
    if (!out.empty()) out.push_back(' ');
    out += w;
  }
  out += suffix;
  return out;
}

uint64_t StreamSeed(uint64_t world_seed, std::string_view text, uint64_t index) {
  return MixSeed(Fnv1a64(text, MixSeed(world_seed)) ^ MixSeed(index + 0x51ed));
}

}  // namespace

SyntheticWorld::SyntheticWorld(SyntheticWorldSpec spec)
    : spec_(std::move(spec)), embedder_(spec_.dimension) {
  if (spec_.regions.empty()) throw Error(ErrorCode::kConfig, "synthetic world needs a region");
  std::set<std::string> anchors;
  for (size_t r = 0; r < spec_.regions.size(); ++r) {
    const auto& region = spec_.regions[r];
    for (const auto& w : region.anchor_words) anchors.insert(ToLower(w));
    if (!region.competent) {
      if (region.anchor_words.empty()) throw Error(ErrorCode::kConfig, "topic needs anchor words");
      continue;
    }
    ball_regions_.push_back(r);
    if (!(region.radius > 0.0 && region.radius < 2.0)) {
      throw Error(ErrorCode::kConfig, "region radius must lie in (0, 2)");
    }
    if (region.center.empty()) {
      if (region.anchor_words.empty()) {
        throw Error(ErrorCode::kConfig, "region needs a center or anchor words");
      }
      centers_.push_back(embedder_.Embed(JoinWords(region.anchor_words, "")));
    } else {
      if (static_cast<int>(region.center.size()) != spec_.dimension) {
        throw Error(ErrorCode::kDimensionMismatch, "region center does not match world dimension");
      }
      if (std::abs(Norm(region.center) - 1.0) > 1e-9) {
        throw Error(ErrorCode::kConfig, "region center must be a unit vector");
      }
      centers_.push_back(region.center);
    }
  }
  if (centers_.empty()) throw Error(ErrorCode::kConfig, "synthetic world needs a competent region");
  auto pool = PseudoWords(spec_.filler_vocabulary + spec_.distractor_vocabulary,
                          spec_.noise_seed ^ kFillerStream ^ kDistractorStream, anchors);
  fillers_.assign(pool.begin(), pool.begin() + spec_.filler_vocabulary);
  distractors_.assign(pool.begin() + spec_.filler_vocabulary, pool.end());
  if (static_cast<int>(distractors_.size()) <
      spec_.distractor_length * (1 + spec_.schedule.max_extra_clusters)) {
    throw Error(ErrorCode::kConfig, "distractor vocabulary too small for the schedule");
  }
}

double SyntheticWorld::Margin(std::span<const double> v, size_t ball) const {
  return (1.0 - Dot(v, centers_[ball])) - radius(ball);
}

std::pair<size_t, double> SyntheticWorld::Nearest(std::span<const double> v) const {
  size_t best = 0;
  double best_margin = Margin(v, 0);
  for (size_t i = 1; i < centers_.size(); ++i) {
    const double m = Margin(v, i);
    if (m < best_margin) {
      best = i;
      best_margin = m;
    }
  }
  return {best, best_margin};
}

bool SyntheticWorld::InCompetence(std::span<const double> v) const { return Nearest(v).second <= 0.0; }

bool SyntheticWorld::InCompetence(std::string_view query) const {
  return InCompetence(embedder_.Embed(query));
}

int SyntheticWorld::DistractorClusters(double margin) const {
  if (margin <= 0.0) return 1;
  const double fraction = std::min(1.0, margin / spec_.schedule.ramp);
  const int extra = static_cast<int>(std::ceil(spec_.schedule.max_extra_clusters * fraction));
  return 1 + std::clamp(extra, 1, spec_.schedule.max_extra_clusters);
}

std::string SyntheticWorld::FaithfulAnswer(size_t ball) const {
  const auto& anchors = spec_.regions[ball_regions_[ball]].anchor_words;
  if (anchors.empty()) return "established answer for competence region " + std::to_string(ball);
  return "established answer concerning " + JoinWords(anchors, ".");
}

std::string SyntheticWorld::TargetReply(std::string_view query, int sample_index) const {
  const auto [region, margin] = Nearest(embedder_.Embed(query));
  if (margin <= 0.0) return FaithfulAnswer(region);
  const int clusters = DistractorClusters(margin);
  std::mt19937_64 rng(StreamSeed(spec_.noise_seed, query, 0));
  const int offset = static_cast<int>(rng() % static_cast<uint64_t>(clusters));
  const int cluster = (offset + sample_index) % clusters;
  // Partial Fisher-Yates over the distractor pool: clusters get disjoint
  // word sets, so no two distractors are equivalent under token overlap.
  std::vector<size_t> order(distractors_.size());
  for (size_t i = 0; i < order.size(); ++i) order[i] = i;
  const size_t needed = static_cast<size_t>(clusters * spec_.distractor_length);
  for (size_t i = 0; i < needed; ++i) {
    const size_t j = i + rng() % (order.size() - i);
    std::swap(order[i], order[j]);
  }
  std::vector<std::string> words;
  for (int w = 0; w < spec_.distractor_length; ++w) {
    words.push_back(distractors_[order[static_cast<size_t>(cluster * spec_.distractor_length + w)]]);
  }
  return JoinWords(words, ".");
}

bool SyntheticWorld::IsFaithful(std::string_view query, std::string_view response) const {
  const auto [region, margin] = Nearest(embedder_.Embed(query));
  return margin <= 0.0 && Trim(response) == FaithfulAnswer(region);
}

bool SyntheticWorld::IsAnchor(size_t region, const std::string& word) const {
  const auto& anchors = spec_.regions[region].anchor_words;
  return std::find(anchors.begin(), anchors.end(), word) != anchors.end();
}

size_t SyntheticWorld::RegionOfWords(const std::vector<std::string>& words) const {
  size_t best = 0;
  int best_count = -1;
  for (size_t r = 0; r < spec_.regions.size(); ++r) {
    int count = 0;
    for (const auto& w : words) count += IsAnchor(r, w) ? 1 : 0;
    if (count > best_count) {
      best = r;
      best_count = count;
    }
  }
  return best;
}

std::string SyntheticWorld::PickFiller(const std::vector<std::string>& exclude,
                                       std::mt19937_64& rng) const {
  for (;;) {
    const std::string& w = fillers_[rng() % fillers_.size()];
    if (std::find(exclude.begin(), exclude.end(), w) == exclude.end()) return w;
  }
}

std::string SyntheticWorld::SeedQuery(uint64_t stream) const {
  std::mt19937_64 rng(MixSeed(spec_.noise_seed ^ MixSeed(stream)));
  const size_t region = ball_regions_[rng() % ball_regions_.size()];
  auto words = spec_.regions[region].anchor_words;
  if (words.empty()) throw Error(ErrorCode::kConfig, "synthetic generator needs anchor words");
  std::shuffle(words.begin(), words.end(), rng);
  if (rng() % 2) words[rng() % words.size()] = PickFiller(words, rng);
  return JoinWords(words, "?");
}

std::string SyntheticWorld::RandomQuery(uint64_t stream) const {
  std::mt19937_64 rng(MixSeed(spec_.noise_seed ^ MixSeed(stream) ^ 0x72616e64ULL));
  const size_t region = rng() % spec_.regions.size();
  auto words = spec_.regions[region].anchor_words;
  if (words.empty()) throw Error(ErrorCode::kConfig, "synthetic generator needs anchor words");
  std::shuffle(words.begin(), words.end(), rng);
  const size_t most = spec_.fresh_max_replacements < 0
                          ? words.size()
                          : std::min(words.size(), static_cast<size_t>(spec_.fresh_max_replacements));
  const size_t replaced = rng() % (most + 1);
  for (size_t i = 0; i < replaced; ++i) words[i] = PickFiller(words, rng);
  std::shuffle(words.begin(), words.end(), rng);
  return JoinWords(words, "?");
}

std::string SyntheticWorld::Transform(std::string_view parent, TransformKind kind,
                                      uint64_t stream) const {
  auto words = Tokenize(parent);
  if (words.empty()) throw Error(ErrorCode::kInvalidArgument, "empty parent query");
  std::mt19937_64 rng(StreamSeed(spec_.noise_seed, parent, stream));
  const size_t region = RegionOfWords(words);
  std::vector<size_t> anchor_pos;
  std::vector<size_t> filler_pos;
  for (size_t i = 0; i < words.size(); ++i) {
    (IsAnchor(region, words[i]) ? anchor_pos : filler_pos).push_back(i);
  }
  switch (kind) {
    case TransformKind::kDeduction: {
      // Toward the nearest competent topic: half of the foreign words, rounded
      // up, become its missing anchors.
      const size_t home = ball_regions_[Nearest(embedder_.Embed(parent)).first];
      std::vector<size_t> foreign;
      for (size_t i = 0; i < words.size(); ++i) {
        if (!IsAnchor(home, words[i])) foreign.push_back(i);
      }
      std::vector<std::string> wanted;
      for (const auto& a : spec_.regions[home].anchor_words) {
        if (std::find(words.begin(), words.end(), a) == words.end()) wanted.push_back(a);
      }
      if (foreign.empty() || wanted.empty()) {
        words.push_back(PickFiller(words, rng));
        break;
      }
      std::shuffle(foreign.begin(), foreign.end(), rng);
      std::shuffle(wanted.begin(), wanted.end(), rng);
      const size_t moved = std::min((foreign.size() + 1) / 2, wanted.size());
      for (size_t i = 0; i < moved; ++i) {
        words[foreign[i]] = wanted[i];
      }
      break;
    }
    case TransformKind::kAnalogy:
      words[rng() % words.size()] = PickFiller(words, rng);
      break;
    case TransformKind::kInduction: {
      std::shuffle(anchor_pos.begin(), anchor_pos.end(), rng);
      std::shuffle(filler_pos.begin(), filler_pos.end(), rng);
      std::vector<size_t> targets = anchor_pos;
      targets.insert(targets.end(), filler_pos.begin(), filler_pos.end());
      for (size_t i = 0; i < std::min<size_t>(2, targets.size()); ++i) {
        words[targets[i]] = PickFiller(words, rng);
      }
      break;
    }
  }
  return JoinWords(words, "?");
}

namespace {

class SyntheticTarget : public ChatBackend {
 public:
  explicit SyntheticTarget(const SyntheticWorld& world) : world_(world) {}
  std::string Complete(std::span<const ChatTurn> turns, int sample_index) override {
    ValidateTurns(turns);
    return world_.TargetReply(turns.back().content, sample_index);
  }

 private:
  const SyntheticWorld& world_;
};

class SyntheticGenerator : public ChatBackend {
 public:
  explicit SyntheticGenerator(const SyntheticWorld& world) : world_(world) {}
  std::string Complete(std::span<const ChatTurn> turns, int sample_index) override {
    ValidateTurns(turns);
    const std::string& prompt = turns.back().content;
    const std::string task = PromptField(prompt, "Task");
    const uint64_t stream = Fnv1a64(PromptField(prompt, "Domain") + "\n" +
                                    PromptField(prompt, "Variant")) ^
                            MixSeed(static_cast<uint64_t>(sample_index));
    if (task == "seed") return world_.SeedQuery(stream);
    if (task == "fresh") return world_.RandomQuery(stream);
    if (auto kind = ParseTransform(task)) {
      return world_.Transform(PromptField(prompt, "Question"), *kind,
                              static_cast<uint64_t>(sample_index));
    }
    throw Error(ErrorCode::kUnparseable, "synthetic generator cannot read task '" + task + "'");
  }

 private:
  const SyntheticWorld& world_;
};

class SyntheticJudge : public ChatBackend {
 public:
  explicit SyntheticJudge(const SyntheticWorld& world) : world_(world) {}
  std::string Complete(std::span<const ChatTurn> turns, int /*sample_index*/) override {
    ValidateTurns(turns);
    const std::string& prompt = turns.back().content;
    const size_t q = prompt.find("\nQuestion: ");
    const size_t r = prompt.rfind("\nResponse: ");
    if (q == std::string::npos || r == std::string::npos || r < q) {
      throw Error(ErrorCode::kUnparseable, "synthetic judge cannot find question and response");
    }
    const std::string query = Trim(prompt.substr(q + 11, r - q - 11));
    const std::string response = Trim(prompt.substr(r + 11));
    return world_.IsFaithful(query, response) ? "verdict: no, confidence: 100"
                                              : "verdict: yes, confidence: 100";
  }

 private:
  const SyntheticWorld& world_;
};

}  // namespace

std::unique_ptr<ChatBackend> MakeSyntheticBackend(const SyntheticWorld& world,
                                                  std::string_view role) {
  if (role == "target") return std::make_unique<SyntheticTarget>(world);
  if (role == "generator") return std::make_unique<SyntheticGenerator>(world);
  if (role == "judge") return std::make_unique<SyntheticJudge>(world);
  throw Error(ErrorCode::kConfig, "unknown synthetic role '" + std::string(role) + "'");
}

std::string_view TransformName(TransformKind kind) {
  switch (kind) {
    case TransformKind::kDeduction: return "deduction";
    case TransformKind::kAnalogy: return "analogy";
    case TransformKind::kInduction: return "induction";
  }
  return "deduction";
}

std::optional<TransformKind> ParseTransform(std::string_view name) {
  const std::string lower = ToLower(name);
  if (lower == "deduction" || lower == "ft1") return TransformKind::kDeduction;
  if (lower == "analogy" || lower == "ft2") return TransformKind::kAnalogy;
  if (lower == "induction" || lower == "ft3") return TransformKind::kInduction;
  return std::nullopt;
}

}  // namespace halmit
