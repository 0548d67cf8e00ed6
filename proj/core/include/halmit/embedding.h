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

#ifndef HALMIT_EMBEDDING_H_
#define HALMIT_EMBEDDING_H_

#include <memory>
#include <span>
#include <string>
#include <string_view>
#include <vector>

namespace halmit {

using Vector = std::vector<double>;

double Dot(std::span<const double> a, std::span<const double> b);
double Dot(std::span<const double> a, std::span<const float> b);
double Norm(std::span<const double> v);
// Throws kDegenerate on a zero vector.
Vector Normalized(std::span<const double> v);
double Cosine(std::span<const double> a, std::span<const double> b);

enum class EmbeddingKind { kRemote, kHashed };

struct EmbeddingSpec {
  EmbeddingKind kind = EmbeddingKind::kHashed;
  int dimension = 256;
  std::string endpoint;    // remote only
  std::string model_name;  // remote only
};

// Every vector returned by an Embedder has unit L2 norm.
class Embedder {
 public:
  virtual ~Embedder() = default;
  virtual Vector Embed(std::string_view text) const = 0;
  virtual int dimension() const = 0;
};

// Signed feature hashing over unigrams and character 3-gram shingles of the
// shared tokenizer's output. Each token contributes a unigram feature of
// weight 1 and its shingles with total squared weight 1, so long words do
// not dominate short ones.
class HashedEmbedder : public Embedder {
 public:
  explicit HashedEmbedder(int dimension);
  Vector Embed(std::string_view text) const override;
  int dimension() const override { return dimension_; }

 private:
  int dimension_;
};

// POST {endpoint}/embeddings with {model, input}; reads data[0].embedding.
class RemoteEmbedder : public Embedder {
 public:
  explicit RemoteEmbedder(EmbeddingSpec spec);
  Vector Embed(std::string_view text) const override;
  int dimension() const override { return spec_.dimension; }

 private:
  EmbeddingSpec spec_;
};

std::unique_ptr<Embedder> MakeEmbedder(const EmbeddingSpec& spec);

}  // namespace halmit

#endif  // HALMIT_EMBEDDING_H_
