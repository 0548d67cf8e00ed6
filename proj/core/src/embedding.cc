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

#include "halmit/embedding.h"

#include <cmath>

#include "halmit/error.h"
#include "halmit/text.h"
#include "http_json.h"

namespace halmit {

double Dot(std::span<const double> a, std::span<const double> b) {
  if (a.size() != b.size()) {
    throw Error(ErrorCode::kDimensionMismatch,
                std::to_string(a.size()) + " vs " + std::to_string(b.size()));
  }
  double sum = 0.0;
  for (size_t i = 0; i < a.size(); ++i) sum += a[i] * b[i];
  return sum;
}

double Dot(std::span<const double> a, std::span<const float> b) {
  if (a.size() != b.size()) {
    throw Error(ErrorCode::kDimensionMismatch,
                std::to_string(a.size()) + " vs " + std::to_string(b.size()));
  }
  double sum = 0.0;
  for (size_t i = 0; i < a.size(); ++i) sum += a[i] * static_cast<double>(b[i]);
  return sum;
}

double Norm(std::span<const double> v) { return std::sqrt(Dot(v, v)); }

Vector Normalized(std::span<const double> v) {
  const double norm = Norm(v);
  if (!(norm > 0.0) || !std::isfinite(norm)) {
    throw Error(ErrorCode::kDegenerate, "cannot normalize a zero or non-finite vector");
  }
  Vector out(v.begin(), v.end());
  for (auto& x : out) x /= norm;
  return out;
}

double Cosine(std::span<const double> a, std::span<const double> b) {
  return Dot(a, b) / (Norm(a) * Norm(b));
}

HashedEmbedder::HashedEmbedder(int dimension) : dimension_(dimension) {
  if (dimension <= 0) throw Error(ErrorCode::kInvalidArgument, "embedding dimension must be positive");
}

namespace {

void AddFeature(Vector& v, std::string_view feature, double weight) {
  const uint64_t h = MixSeed(Fnv1a64(feature));
  const size_t bucket = h % v.size();
  v[bucket] += (h >> 63) ? -weight : weight;
}

}  // namespace

Vector HashedEmbedder::Embed(std::string_view text) const {
  const std::string trimmed = Trim(text);
  if (trimmed.empty()) throw Error(ErrorCode::kInvalidArgument, "cannot embed empty text");
  Vector v(static_cast<size_t>(dimension_), 0.0);
  for (const auto& token : Tokenize(trimmed)) {
    AddFeature(v, "u:" + token, 1.0);
    const std::string padded = "^" + token + "$";
    const size_t shingles = padded.size() - 2;
    const double weight = 1.0 / std::sqrt(static_cast<double>(shingles));
    for (size_t i = 0; i < shingles; ++i) {
      AddFeature(v, "c:" + padded.substr(i, 3), weight);
    }
  }
  // Punctuation-only text, or features that cancelled exactly.
  if (Norm(v) == 0.0) AddFeature(v, "raw:" + trimmed, 1.0);
  return Normalized(v);
}

RemoteEmbedder::RemoteEmbedder(EmbeddingSpec spec) : spec_(std::move(spec)) {}

Vector RemoteEmbedder::Embed(std::string_view text) const {
  if (Trim(text).empty()) throw Error(ErrorCode::kInvalidArgument, "cannot embed empty text");
  nlohmann::json body = {{"model", spec_.model_name}, {"input", std::string(text)}};
  auto reply = internal::PostJson(spec_.endpoint, "/embeddings", body, {});
  try {
    Vector v = reply.at("data").at(0).at("embedding").get<Vector>();
    if (static_cast<int>(v.size()) != spec_.dimension) {
      throw Error(ErrorCode::kDimensionMismatch,
                  "remote embedding has dimension " + std::to_string(v.size()) +
                      ", configured " + std::to_string(spec_.dimension));
    }
    return Normalized(v);
  } catch (const nlohmann::json::exception& e) {
    throw Error(ErrorCode::kUnparseable, std::string("embedding reply: ") + e.what());
  }
}

std::unique_ptr<Embedder> MakeEmbedder(const EmbeddingSpec& spec) {
  if (spec.kind == EmbeddingKind::kHashed) return std::make_unique<HashedEmbedder>(spec.dimension);
  return std::make_unique<RemoteEmbedder>(spec);
}

}  // namespace halmit
