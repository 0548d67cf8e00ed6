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

#include "halmit/vector_store.h"

#include <algorithm>
#include <bit>
#include <cmath>
#include <cstring>
#include <fstream>
#include <mutex>
#include <sstream>

#include "halmit/embedding.h"
#include "halmit/error.h"
#include "halmit/text.h"
#include "json_io.h"

namespace halmit {
namespace {

constexpr char kMagic[8] = {'H', 'A', 'L', 'M', 'I', 'T', 'V', 'S'};
constexpr size_t kHeaderBytes = 40;
// Float32 embeddings cannot be normalized tighter than this.
constexpr double kStoredNormTolerance = 1e-5;

void PutU32(std::string& out, uint32_t v) {
  for (int i = 0; i < 4; ++i) out.push_back(static_cast<char>((v >> (8 * i)) & 0xff));
}

void PutU64(std::string& out, uint64_t v) {
  for (int i = 0; i < 8; ++i) out.push_back(static_cast<char>((v >> (8 * i)) & 0xff));
}

uint32_t GetU32(const char* p) {
  uint32_t v = 0;
  for (int i = 0; i < 4; ++i) v |= static_cast<uint32_t>(static_cast<unsigned char>(p[i])) << (8 * i);
  return v;
}

uint64_t GetU64(const char* p) {
  uint64_t v = 0;
  for (int i = 0; i < 8; ++i) v |= static_cast<uint64_t>(static_cast<unsigned char>(p[i])) << (8 * i);
  return v;
}

}  // namespace

nlohmann::json RecordToJson(const BoundaryRecord& record, bool with_embedding) {
  nlohmann::json j = {{"id", record.id},
                      {"domain", record.domain},
                      {"query", record.query},
                      {"responses", record.responses},
                      {"semantic_entropy", record.semantic_entropy},
                      {"hallucinated", record.hallucinated},
                      {"iteration", record.iteration}};
  if (record.lineage) {
    j["lineage"] = {{"parent_id", record.lineage->parent_id},
                    {"transform", TransformName(record.lineage->transform)}};
  } else {
    j["lineage"] = nullptr;
  }
  if (with_embedding) j["embedding"] = record.embedding;
  return j;
}

BoundaryRecord RecordFromJson(const nlohmann::json& j) {
  BoundaryRecord r;
  r.id = j.at("id").get<int64_t>();
  r.domain = j.at("domain").get<std::string>();
  r.query = j.at("query").get<std::string>();
  r.responses = j.at("responses").get<std::vector<std::string>>();
  r.semantic_entropy = j.at("semantic_entropy").get<double>();
  r.hallucinated = j.at("hallucinated").get<bool>();
  r.iteration = j.at("iteration").get<int64_t>();
  if (j.contains("lineage") && !j["lineage"].is_null()) {
    auto kind = ParseTransform(j["lineage"].at("transform").get<std::string>());
    if (!kind) throw Error(ErrorCode::kCorrupt, "unknown transform in lineage");
    r.lineage = Lineage{j["lineage"].at("parent_id").get<int64_t>(), *kind};
  }
  if (j.contains("embedding")) r.embedding = j["embedding"].get<std::vector<float>>();
  return r;
}

VectorStore::VectorStore(int dimension) : dimension_(dimension) {
  if (dimension <= 0) throw Error(ErrorCode::kInvalidArgument, "store dimension must be positive");
}

VectorStore::VectorStore(VectorStore&& other) noexcept {
  std::unique_lock lock(other.mu_);
  dimension_ = other.dimension_;
  records_ = std::move(other.records_);
  index_ = std::move(other.index_);
}

VectorStore& VectorStore::operator=(VectorStore&& other) noexcept {
  if (this != &other) {
    std::scoped_lock lock(mu_, other.mu_);
    dimension_ = other.dimension_;
    records_ = std::move(other.records_);
    index_ = std::move(other.index_);
  }
  return *this;
}

size_t VectorStore::size() const {
  std::shared_lock lock(mu_);
  return records_.size();
}

int64_t VectorStore::Insert(BoundaryRecord record) {
  if (static_cast<int>(record.embedding.size()) != dimension_) {
    throw Error(ErrorCode::kDimensionMismatch,
                "record has dimension " + std::to_string(record.embedding.size()) +
                    ", store has " + std::to_string(dimension_));
  }
  double norm2 = 0.0;
  for (float x : record.embedding) norm2 += static_cast<double>(x) * x;
  if (std::abs(std::sqrt(norm2) - 1.0) > kStoredNormTolerance) {
    throw Error(ErrorCode::kInvalidArgument, "record embedding is not unit norm");
  }
  std::unique_lock lock(mu_);
  const int64_t last = records_.empty() ? 0 : records_.back().id;
  if (record.id == 0) {
    record.id = last + 1;
  } else if (index_.contains(record.id)) {
    throw Error(ErrorCode::kDuplicateId, "id " + std::to_string(record.id) + " already stored");
  } else if (record.id < last) {
    throw Error(ErrorCode::kInvalidArgument, "ids must be strictly increasing");
  }
  index_.emplace(record.id, records_.size());
  records_.push_back(std::move(record));
  return records_.back().id;
}

std::optional<BoundaryRecord> VectorStore::Get(int64_t id) const {
  std::shared_lock lock(mu_);
  auto it = index_.find(id);
  if (it == index_.end()) return std::nullopt;
  return records_[it->second];
}

std::vector<BoundaryRecord> VectorStore::Records() const {
  std::shared_lock lock(mu_);
  return records_;
}

std::vector<Neighbor> VectorStore::TopK(std::span<const double> query, int k,
                                        const std::optional<std::string>& domain) const {
  if (static_cast<int>(query.size()) != dimension_) {
    throw Error(ErrorCode::kDimensionMismatch, "query vector does not match store dimension");
  }
  if (k <= 0) throw Error(ErrorCode::kInvalidArgument, "k must be positive");
  std::shared_lock lock(mu_);
  std::vector<std::pair<double, size_t>> scored;
  scored.reserve(records_.size());
  for (size_t i = 0; i < records_.size(); ++i) {
    if (domain && records_[i].domain != *domain) continue;
    scored.emplace_back(Dot(query, records_[i].embedding), i);
  }
  auto better = [this](const auto& a, const auto& b) {
    if (a.first != b.first) return a.first > b.first;
    return records_[a.second].id < records_[b.second].id;
  };
  const size_t take = std::min(scored.size(), static_cast<size_t>(k));
  std::partial_sort(scored.begin(), scored.begin() + static_cast<std::ptrdiff_t>(take), scored.end(),
                    better);
  std::vector<Neighbor> out;
  out.reserve(take);
  for (size_t i = 0; i < take; ++i) out.push_back({records_[scored[i].second], scored[i].first});
  return out;
}

void VectorStore::Save(const std::filesystem::path& path) const {
  std::shared_lock lock(mu_);
  std::string metadata;
  for (const auto& r : records_) {
    metadata += RecordToJson(r, /*with_embedding=*/false).dump();
    metadata.push_back('\n');
  }
  std::string payload = metadata;
  payload.reserve(metadata.size() + records_.size() * static_cast<size_t>(dimension_) * 4);
  for (const auto& r : records_) {
    for (float x : r.embedding) PutU32(payload, std::bit_cast<uint32_t>(x));
  }
  std::string header(kMagic, sizeof(kMagic));
  PutU32(header, kFormatVersion);
  PutU32(header, static_cast<uint32_t>(dimension_));
  PutU64(header, records_.size());
  PutU64(header, metadata.size());
  PutU64(header, Fnv1a64(payload));

  const auto tmp = std::filesystem::path(path.string() + ".tmp");
  {
    std::ofstream out(tmp, std::ios::binary | std::ios::trunc);
    if (!out) throw Error(ErrorCode::kIo, "cannot write " + tmp.string());
    out.write(header.data(), static_cast<std::streamsize>(header.size()));
    out.write(payload.data(), static_cast<std::streamsize>(payload.size()));
    if (!out) throw Error(ErrorCode::kIo, "short write to " + tmp.string());
  }
  std::filesystem::rename(tmp, path);
}

VectorStore VectorStore::Load(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw Error(ErrorCode::kIo, "cannot read " + path.string());
  std::string bytes((std::istreambuf_iterator<char>(in)), std::istreambuf_iterator<char>());
  if (bytes.size() < kHeaderBytes || std::memcmp(bytes.data(), kMagic, sizeof(kMagic)) != 0) {
    throw Error(ErrorCode::kCorrupt, path.string() + " is not a store file");
  }
  const char* h = bytes.data() + sizeof(kMagic);
  const uint32_t version = GetU32(h);
  if (version != kFormatVersion) {
    throw Error(ErrorCode::kVersionMismatch, "store version " + std::to_string(version) +
                                                 ", expected " + std::to_string(kFormatVersion));
  }
  const uint32_t dimension = GetU32(h + 4);
  const uint64_t count = GetU64(h + 8);
  const uint64_t metadata_bytes = GetU64(h + 16);
  const uint64_t checksum = GetU64(h + 24);
  const std::string_view payload(bytes.data() + kHeaderBytes, bytes.size() - kHeaderBytes);
  const uint64_t expected_bytes = metadata_bytes + count * dimension * 4ULL;
  if (payload.size() != expected_bytes || Fnv1a64(payload) != checksum) {
    throw Error(ErrorCode::kCorrupt, "checksum mismatch in " + path.string());
  }

  VectorStore store(static_cast<int>(dimension));
  std::istringstream lines{std::string(payload.substr(0, metadata_bytes))};
  const char* floats = payload.data() + metadata_bytes;
  std::string line;
  for (uint64_t i = 0; i < count; ++i) {
    if (!std::getline(lines, line)) throw Error(ErrorCode::kCorrupt, "missing record metadata");
    BoundaryRecord r;
    try {
      r = RecordFromJson(nlohmann::json::parse(line));
    } catch (const nlohmann::json::exception& e) {
      throw Error(ErrorCode::kCorrupt, std::string("record metadata: ") + e.what());
    }
    r.embedding.resize(dimension);
    for (uint32_t d = 0; d < dimension; ++d) {
      r.embedding[d] = std::bit_cast<float>(GetU32(floats + (i * dimension + d) * 4));
    }
    // Bypass Insert's checks: the file was checksummed when written.
    store.index_.emplace(r.id, store.records_.size());
    store.records_.push_back(std::move(r));
  }
  return store;
}

void VectorStore::ExportJsonl(std::ostream& out) const {
  std::shared_lock lock(mu_);
  for (const auto& r : records_) out << RecordToJson(r, /*with_embedding=*/true).dump() << '\n';
}

}  // namespace halmit
