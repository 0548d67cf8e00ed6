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

#ifndef HALMIT_VECTOR_STORE_H_
#define HALMIT_VECTOR_STORE_H_

#include <cstdint>
#include <filesystem>
#include <iosfwd>
#include <optional>
#include <shared_mutex>
#include <span>
#include <string>
#include <unordered_map>
#include <vector>

#include "halmit/transform.h"

namespace halmit {

struct Lineage {
  int64_t parent_id = 0;
  TransformKind transform = TransformKind::kDeduction;

  friend bool operator==(const Lineage&, const Lineage&) = default;
};

// One discovered point on an agent's generalization bound.
struct BoundaryRecord {
  int64_t id = 0;  // 0 on insert means "assign the next id"
  std::string domain;
  std::string query;
  std::vector<std::string> responses;
  double semantic_entropy = 0.0;  // nats
  std::vector<float> embedding;   // unit norm
  bool hallucinated = true;
  std::optional<Lineage> lineage;
  int64_t iteration = 0;

  friend bool operator==(const BoundaryRecord&, const BoundaryRecord&) = default;
};

struct Neighbor {
  BoundaryRecord record;
  double similarity = 0.0;  // cosine(query, record.embedding)
};

// Exact flat-scan cosine index. Readers share a lock; Insert takes it
// exclusively.
class VectorStore {
 public:
  static constexpr uint32_t kFormatVersion = 1;

  explicit VectorStore(int dimension);
  VectorStore(VectorStore&& other) noexcept;
  VectorStore& operator=(VectorStore&& other) noexcept;

  int dimension() const { return dimension_; }
  size_t size() const;

  // Returns the record's id. Ids are strictly increasing.
  int64_t Insert(BoundaryRecord record);
  std::optional<BoundaryRecord> Get(int64_t id) const;
  std::vector<BoundaryRecord> Records() const;

  // At most k neighbors by descending similarity, ties to the smaller id.
  // `domain` restricts the scan to records with that tag.
  std::vector<Neighbor> TopK(std::span<const double> query, int k,
                             const std::optional<std::string>& domain = std::nullopt) const;

  // Layout: 40-byte header {magic "HALMITVS", u32 version, u32 dimension,
  // u64 count, u64 metadata bytes, u64 FNV-1a checksum of the payload}, then
  // the metadata (one JSON object per record and line, without the
  // embedding), then count*dimension little-endian float32 values.
  void Save(const std::filesystem::path& path) const;
  static VectorStore Load(const std::filesystem::path& path);

  // One JSON object per line, with BoundaryRecord's field names.
  void ExportJsonl(std::ostream& out) const;

 private:
  int dimension_;
  mutable std::shared_mutex mu_;
  std::vector<BoundaryRecord> records_;
  std::unordered_map<int64_t, size_t> index_;
};

}  // namespace halmit

#endif  // HALMIT_VECTOR_STORE_H_
