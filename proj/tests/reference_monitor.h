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

// Independent straight-line version of the watchdog decision, written
// against the documented procedure rather than the library's code.

#ifndef HALMIT_TESTS_REFERENCE_MONITOR_H_
#define HALMIT_TESTS_REFERENCE_MONITOR_H_

#include <algorithm>
#include <cmath>
#include <map>
#include <random>
#include <string>
#include <utility>
#include <vector>

#include "halmit/monitor.h"
#include "halmit/vector_store.h"
#include "test_util.h"

namespace halmit::testing {

struct ReferenceVerdict {
  bool flagged = false;
  VerdictReason reason = VerdictReason::kEmptyStore;
};

// `replies` are the K target samples for the query; they are compared by
// string identity.
inline ReferenceVerdict ReferenceCheck(const std::vector<BoundaryRecord>& records, const Vector& q,
                                       double epsilon, int k_retrieve,
                                       const std::vector<std::string>& replies) {
  std::vector<std::pair<double, const BoundaryRecord*>> scored;
  for (const auto& r : records) {
    double s = 0.0;
    for (size_t i = 0; i < q.size(); ++i) s += q[i] * static_cast<double>(r.embedding[i]);
    scored.emplace_back(s, &r);
  }
  std::sort(scored.begin(), scored.end(), [](const auto& a, const auto& b) {
    if (a.first != b.first) return a.first > b.first;
    return a.second->id < b.second->id;
  });
  if (static_cast<int>(scored.size()) > k_retrieve) scored.resize(static_cast<size_t>(k_retrieve));
  if (scored.empty()) return {false, VerdictReason::kEmptyStore};

  if (scored.size() >= 3 && scored[2].first > epsilon) {
    Vector c(q.size(), 0.0);
    double w = 0.0;
    for (int j = 0; j < 3; ++j) {
      w += scored[j].first;
      for (size_t i = 0; i < q.size(); ++i) c[i] += scored[j].first * scored[j].second->embedding[i];
    }
    double norm = 0.0;
    for (double& x : c) {
      x /= w;
      norm += x * x;
    }
    norm = std::sqrt(norm);
    double sc = 0.0;
    for (size_t i = 0; i < q.size(); ++i) sc += q[i] * c[i] / norm;
    if (sc >= epsilon) return {true, VerdictReason::kCentroidProximity};
  }

  std::map<std::string, int> counts;
  for (const auto& r : replies) ++counts[r];
  double h = 0.0;
  for (const auto& [text, n] : counts) {
    const double p = static_cast<double>(n) / static_cast<double>(replies.size());
    h -= p * std::log(p);
  }
  double max_h = 0.0;
  for (const auto& [s, r] : scored) max_h = std::max(max_h, r->semantic_entropy);
  if (h > max_h) return {true, VerdictReason::kEntropyExceeds};
  return {false, VerdictReason::kWithinBound};
}

// A small random store around a random direction, a query near it and the
// target's K replies.
struct RandomCase {
  VectorStore store{8};
  Vector query;
  std::vector<std::string> replies;
};

inline RandomCase MakeRandomCase(std::mt19937_64& rng, int dimension, int max_records, int k) {
  RandomCase c{VectorStore(dimension), {}, {}};
  std::uniform_real_distribution<double> u(0.0, 1.0);
  std::normal_distribution<double> normal;
  const Vector base = RandomUnit(dimension, rng);
  auto near = [&](double spread) {
    Vector v(base);
    for (double& x : v) x += spread * normal(rng);
    return Normalized(v);
  };
  const int n = static_cast<int>(rng() % static_cast<uint64_t>(max_records + 1));
  for (int i = 0; i < n; ++i) {
    BoundaryRecord r;
    r.domain = "d";
    r.query = "record " + std::to_string(i);
    const Vector v = near(0.05 + 0.6 * u(rng));
    r.embedding.assign(v.begin(), v.end());
    r.semantic_entropy = std::log(static_cast<double>(k)) * u(rng);
    c.store.Insert(std::move(r));
  }
  c.query = near(0.05 + 0.6 * u(rng));
  const int alphabet = 1 + static_cast<int>(rng() % 4);
  for (int i = 0; i < k; ++i) c.replies.push_back(std::string(1, static_cast<char>('a' + rng() % alphabet)));
  return c;
}

}  // namespace halmit::testing

#endif  // HALMIT_TESTS_REFERENCE_MONITOR_H_
