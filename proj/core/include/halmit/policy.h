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

// Reinforced choice of transformation probabilities.
//
// Every judged child query earns a reward
//
//   R_i = H_i - H_{i-1}     if no sampled response hallucinated,
//   R_i = |1 / R_{i-1}|     otherwise,
//
// and the probability of transformation j at a state is R_j / sum_k R_k.
// A small feed-forward network regresses the reward of each transformation
// from state features; at inference its three outputs are turned into
// probabilities with the same normalization.

#ifndef HALMIT_POLICY_H_
#define HALMIT_POLICY_H_

#include <array>
#include <cstdint>
#include <filesystem>
#include <span>
#include <string>
#include <string_view>
#include <vector>

#include <Eigen/Dense>

#include "halmit/embedding.h"
#include "halmit/transform.h"

namespace halmit {

// Rewards (and previous rewards before inversion) are kept at least this far
// from zero.
inline constexpr double kRewardFloor = 1e-3;
inline constexpr int kStateCount = 64;

// sig_product != 0 reads only the entropies; sig_product == 0 reads only
// r_prev. A query without predecessor uses h_prev = 0 and r_prev = 1.
double Reward(double h_prev, double h_cur, int sig_product, double r_prev);

// Floors each reward at kRewardFloor and normalizes.
TransformProbabilities ProbabilitiesFromRewards(std::array<double, 3> rewards);

struct StateFeatures {
  int index = 0;                  // floor(drift * e^H / omega), clamped to [0, 63]
  std::vector<double> values;     // {index / 63, drift, H}
};

// drift is 1 - cosine(root query, current query).
StateFeatures ComputeStateFeatures(double drift, double entropy, double omega);
StateFeatures ComputeStateFeatures(const Embedder& embedder, std::string_view root,
                                   std::string_view current, double entropy, double omega);

// One trial of a transformation at a state.
struct PolicySample {
  std::string query;
  std::vector<std::string> responses;
  double h_prev = 0.0;
  double h_cur = 0.0;
  int sig_product = 1;
  double reward = 0.0;
  TransformProbabilities p_target = kUniformProbabilities;
  std::vector<double> state_features;
  TransformKind transform = TransformKind::kDeduction;
};

// Fully connected network with rectifier hidden layers and a linear output
// layer of three values, one per TransformKind.
class ValueNetwork {
 public:
  static std::vector<int> DefaultLayers(int input_size) { return {input_size, 64, 64, 3}; }

  // All parameters zero.
  explicit ValueNetwork(std::vector<int> layer_sizes);
  // Uniform(-1/sqrt(fan_in), 1/sqrt(fan_in)) weights and biases.
  static ValueNetwork Initialized(std::vector<int> layer_sizes, uint64_t seed);

  const std::vector<int>& layer_sizes() const { return sizes_; }
  int input_size() const { return sizes_.front(); }
  size_t layer_count() const { return weights_.size(); }
  Eigen::MatrixXd& weight(size_t layer) { return weights_[layer]; }
  Eigen::VectorXd& bias(size_t layer) { return biases_[layer]; }
  const Eigen::MatrixXd& weight(size_t layer) const { return weights_[layer]; }
  const Eigen::VectorXd& bias(size_t layer) const { return biases_[layer]; }

  std::array<double, 3> Forward(std::span<const double> features) const;
  // One sample per column; returns 3 x N.
  Eigen::MatrixXd ForwardBatch(const Eigen::MatrixXd& inputs) const;

  // Flat parameter vector: per layer the column-major weights, then biases.
  size_t parameter_count() const;
  std::vector<double> Parameters() const;
  void SetParameters(std::span<const double> params);

  // Mean over columns of (target - q[action])^2; fills `gradient` (flat,
  // same layout as Parameters()) when non-null.
  double LossAndGradient(const Eigen::MatrixXd& inputs, std::span<const int> actions,
                         std::span<const double> targets, std::vector<double>* gradient) const;

  // Header {magic "HALMITVN", u32 version, u32 layer count, u32 sizes...,
  // u64 seed, u32 epoch, u64 parameter count} then float32 parameters, all
  // little-endian.
  void Save(const std::filesystem::path& path, uint64_t seed, int epoch) const;
  static ValueNetwork Load(const std::filesystem::path& path);

 private:
  std::vector<int> sizes_;
  std::vector<Eigen::MatrixXd> weights_;
  std::vector<Eigen::VectorXd> biases_;
};

struct TrainConfig {
  double learning_rate = 1e-4;
  int batch_size = 64;
  int max_epochs = 300;
  uint64_t rng_seed = 0;
};

struct TrainResult {
  ValueNetwork net;
  double initial_loss = 0.0;        // full-dataset loss before the first update
  std::vector<double> loss_curve;   // full-dataset loss after each epoch
};

// Plain mini-batch gradient descent on the squared error between each
// sample's observed reward and the network's value for its transformation.
// Throws kInvalidArgument when the dataset is smaller than one batch and
// kNumerical when the loss stops being finite.
TrainResult Train(std::span<const PolicySample> dataset, const TrainConfig& config);
TrainResult Train(std::span<const PolicySample> dataset, const TrainConfig& config,
                  ValueNetwork initial);

TransformProbabilities SelectProbabilities(const ValueNetwork& net,
                                           std::span<const double> features);

}  // namespace halmit

#endif  // HALMIT_POLICY_H_
