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

#include "halmit/policy.h"

#include <algorithm>
#include <bit>
#include <cmath>
#include <cstring>
#include <fstream>
#include <numeric>
#include <random>
#include <sstream>

#include "halmit/error.h"

namespace halmit {

double Reward(double h_prev, double h_cur, int sig_product, double r_prev) {
  if (sig_product != 0) return h_cur - h_prev;
  double r = r_prev;
  if (std::abs(r) < kRewardFloor) r = r < 0.0 ? -kRewardFloor : kRewardFloor;
  return std::abs(1.0 / r);
}

TransformProbabilities ProbabilitiesFromRewards(std::array<double, 3> rewards) {
  double total = 0.0;
  for (auto& r : rewards) {
    if (!std::isfinite(r)) throw Error(ErrorCode::kNumerical, "non-finite reward");
    r = std::max(r, kRewardFloor);
    total += r;
  }
  TransformProbabilities p;
  for (size_t j = 0; j < 3; ++j) p[j] = rewards[j] / total;
  return p;
}

StateFeatures ComputeStateFeatures(double drift, double entropy, double omega) {
  if (!(omega > 0.0)) throw Error(ErrorCode::kInvalidArgument, "omega must be positive");
  drift = std::max(drift, 0.0);
  // The 1e-9 nudge keeps exact products such as 0.5 * e^{ln 2} / 0.5 from
  // flooring one state too low after rounding.
  const double raw = std::floor(drift * std::exp(entropy) / omega + 1e-9);
  StateFeatures f;
  f.index = static_cast<int>(std::clamp(raw, 0.0, static_cast<double>(kStateCount - 1)));
  f.values = {f.index / static_cast<double>(kStateCount - 1), drift, entropy};
  return f;
}

StateFeatures ComputeStateFeatures(const Embedder& embedder, std::string_view root,
                                   std::string_view current, double entropy, double omega) {
  const double drift = root == current ? 0.0 : 1.0 - Dot(embedder.Embed(root), embedder.Embed(current));
  return ComputeStateFeatures(drift, entropy, omega);
}

ValueNetwork::ValueNetwork(std::vector<int> layer_sizes) : sizes_(std::move(layer_sizes)) {
  if (sizes_.size() < 2 || sizes_.back() != 3) {
    throw Error(ErrorCode::kInvalidArgument, "value network needs >= 2 layers and 3 outputs");
  }
  for (int s : sizes_) {
    if (s <= 0) throw Error(ErrorCode::kInvalidArgument, "layer sizes must be positive");
  }
  for (size_t l = 0; l + 1 < sizes_.size(); ++l) {
    weights_.push_back(Eigen::MatrixXd::Zero(sizes_[l + 1], sizes_[l]));
    biases_.push_back(Eigen::VectorXd::Zero(sizes_[l + 1]));
  }
}

ValueNetwork ValueNetwork::Initialized(std::vector<int> layer_sizes, uint64_t seed) {
  ValueNetwork net(std::move(layer_sizes));
  std::mt19937_64 rng(seed);
  for (size_t l = 0; l < net.weights_.size(); ++l) {
    const double bound = 1.0 / std::sqrt(static_cast<double>(net.sizes_[l]));
    std::uniform_real_distribution<double> dist(-bound, bound);
    for (Eigen::Index j = 0; j < net.weights_[l].cols(); ++j) {
      for (Eigen::Index i = 0; i < net.weights_[l].rows(); ++i) net.weights_[l](i, j) = dist(rng);
    }
    for (Eigen::Index i = 0; i < net.biases_[l].size(); ++i) net.biases_[l](i) = dist(rng);
  }
  return net;
}

Eigen::MatrixXd ValueNetwork::ForwardBatch(const Eigen::MatrixXd& inputs) const {
  if (inputs.rows() != sizes_.front()) {
    throw Error(ErrorCode::kDimensionMismatch,
                "network expects " + std::to_string(sizes_.front()) + " features, got " +
                    std::to_string(inputs.rows()));
  }
  Eigen::MatrixXd h = inputs;
  for (size_t l = 0; l < weights_.size(); ++l) {
    Eigen::MatrixXd z = (weights_[l] * h).colwise() + biases_[l];
    h = l + 1 < weights_.size() ? Eigen::MatrixXd(z.cwiseMax(0.0)) : z;
  }
  return h;
}

std::array<double, 3> ValueNetwork::Forward(std::span<const double> features) const {
  Eigen::MatrixXd x(static_cast<Eigen::Index>(features.size()), 1);
  for (size_t i = 0; i < features.size(); ++i) x(static_cast<Eigen::Index>(i), 0) = features[i];
  const Eigen::MatrixXd q = ForwardBatch(x);
  return {q(0, 0), q(1, 0), q(2, 0)};
}

size_t ValueNetwork::parameter_count() const {
  size_t n = 0;
  for (size_t l = 0; l < weights_.size(); ++l) {
    n += static_cast<size_t>(weights_[l].size() + biases_[l].size());
  }
  return n;
}

std::vector<double> ValueNetwork::Parameters() const {
  std::vector<double> out;
  out.reserve(parameter_count());
  for (size_t l = 0; l < weights_.size(); ++l) {
    out.insert(out.end(), weights_[l].data(), weights_[l].data() + weights_[l].size());
    out.insert(out.end(), biases_[l].data(), biases_[l].data() + biases_[l].size());
  }
  return out;
}

void ValueNetwork::SetParameters(std::span<const double> params) {
  if (params.size() != parameter_count()) {
    throw Error(ErrorCode::kDimensionMismatch, "parameter vector has the wrong length");
  }
  size_t offset = 0;
  for (size_t l = 0; l < weights_.size(); ++l) {
    std::copy_n(params.data() + offset, weights_[l].size(), weights_[l].data());
    offset += static_cast<size_t>(weights_[l].size());
    std::copy_n(params.data() + offset, biases_[l].size(), biases_[l].data());
    offset += static_cast<size_t>(biases_[l].size());
  }
}

double ValueNetwork::LossAndGradient(const Eigen::MatrixXd& inputs, std::span<const int> actions,
                                     std::span<const double> targets,
                                     std::vector<double>* gradient) const {
  const Eigen::Index n = inputs.cols();
  if (static_cast<size_t>(n) != actions.size() || actions.size() != targets.size() || n == 0) {
    throw Error(ErrorCode::kInvalidArgument, "batch shapes disagree");
  }
  if (inputs.rows() != sizes_.front()) {
    throw Error(ErrorCode::kDimensionMismatch, "batch feature length does not match the network");
  }
  // Forward, keeping pre-activations for the backward pass.
  std::vector<Eigen::MatrixXd> activations{inputs};
  std::vector<Eigen::MatrixXd> pre;
  for (size_t l = 0; l < weights_.size(); ++l) {
    Eigen::MatrixXd z = (weights_[l] * activations.back()).colwise() + biases_[l];
    pre.push_back(z);
    activations.push_back(l + 1 < weights_.size() ? Eigen::MatrixXd(z.cwiseMax(0.0)) : z);
  }
  const Eigen::MatrixXd& out = activations.back();
  double loss = 0.0;
  Eigen::MatrixXd delta = Eigen::MatrixXd::Zero(3, n);
  for (Eigen::Index i = 0; i < n; ++i) {
    const int a = actions[static_cast<size_t>(i)];
    if (a < 0 || a > 2) throw Error(ErrorCode::kInvalidArgument, "action out of range");
    const double err = out(a, i) - targets[static_cast<size_t>(i)];
    loss += err * err;
    delta(a, i) = 2.0 * err / static_cast<double>(n);
  }
  loss /= static_cast<double>(n);
  if (gradient == nullptr) return loss;

  std::vector<Eigen::MatrixXd> grad_w(weights_.size());
  std::vector<Eigen::VectorXd> grad_b(weights_.size());
  for (size_t l = weights_.size(); l-- > 0;) {
    grad_w[l] = delta * activations[l].transpose();
    grad_b[l] = delta.rowwise().sum();
    if (l > 0) {
      delta = (weights_[l].transpose() * delta).cwiseProduct(
          (pre[l - 1].array() > 0.0).cast<double>().matrix());
    }
  }
  gradient->clear();
  gradient->reserve(parameter_count());
  for (size_t l = 0; l < weights_.size(); ++l) {
    gradient->insert(gradient->end(), grad_w[l].data(), grad_w[l].data() + grad_w[l].size());
    gradient->insert(gradient->end(), grad_b[l].data(), grad_b[l].data() + grad_b[l].size());
  }
  return loss;
}

namespace {

constexpr char kNetMagic[8] = {'H', 'A', 'L', 'M', 'I', 'T', 'V', 'N'};
constexpr uint32_t kNetVersion = 1;

template <typename T>
void PutLe(std::string& out, T v) {
  for (size_t i = 0; i < sizeof(T); ++i) out.push_back(static_cast<char>((v >> (8 * i)) & 0xff));
}

template <typename T>
T GetLe(const std::string& in, size_t& pos) {
  if (pos + sizeof(T) > in.size()) throw Error(ErrorCode::kCorrupt, "truncated checkpoint");
  T v = 0;
  for (size_t i = 0; i < sizeof(T); ++i) {
    v |= static_cast<T>(static_cast<unsigned char>(in[pos + i])) << (8 * i);
  }
  pos += sizeof(T);
  return v;
}

}  // namespace

void ValueNetwork::Save(const std::filesystem::path& path, uint64_t seed, int epoch) const {
  std::string bytes(kNetMagic, sizeof(kNetMagic));
  PutLe<uint32_t>(bytes, kNetVersion);
  PutLe<uint32_t>(bytes, static_cast<uint32_t>(sizes_.size()));
  for (int s : sizes_) PutLe<uint32_t>(bytes, static_cast<uint32_t>(s));
  PutLe<uint64_t>(bytes, seed);
  PutLe<uint32_t>(bytes, static_cast<uint32_t>(epoch));
  const auto params = Parameters();
  PutLe<uint64_t>(bytes, params.size());
  for (double p : params) PutLe<uint32_t>(bytes, std::bit_cast<uint32_t>(static_cast<float>(p)));
  std::ofstream out(path, std::ios::binary | std::ios::trunc);
  if (!out) throw Error(ErrorCode::kIo, "cannot write " + path.string());
  out.write(bytes.data(), static_cast<std::streamsize>(bytes.size()));
  if (!out) throw Error(ErrorCode::kIo, "short write to " + path.string());
}

ValueNetwork ValueNetwork::Load(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw Error(ErrorCode::kIo, "cannot read " + path.string());
  const std::string bytes((std::istreambuf_iterator<char>(in)), std::istreambuf_iterator<char>());
  if (bytes.size() < sizeof(kNetMagic) || std::memcmp(bytes.data(), kNetMagic, sizeof(kNetMagic)) != 0) {
    throw Error(ErrorCode::kCorrupt, path.string() + " is not a network checkpoint");
  }
  size_t pos = sizeof(kNetMagic);
  if (GetLe<uint32_t>(bytes, pos) != kNetVersion) {
    throw Error(ErrorCode::kVersionMismatch, "unsupported checkpoint version");
  }
  const uint32_t layers = GetLe<uint32_t>(bytes, pos);
  if (layers > 64) throw Error(ErrorCode::kCorrupt, "implausible layer count");
  std::vector<int> sizes;
  for (uint32_t i = 0; i < layers; ++i) sizes.push_back(static_cast<int>(GetLe<uint32_t>(bytes, pos)));
  GetLe<uint64_t>(bytes, pos);  // seed
  GetLe<uint32_t>(bytes, pos);  // epoch
  ValueNetwork net(std::move(sizes));
  const uint64_t count = GetLe<uint64_t>(bytes, pos);
  if (count != net.parameter_count()) throw Error(ErrorCode::kCorrupt, "parameter count mismatch");
  std::vector<double> params(count);
  for (auto& p : params) p = std::bit_cast<float>(GetLe<uint32_t>(bytes, pos));
  if (pos != bytes.size()) throw Error(ErrorCode::kCorrupt, "trailing bytes in checkpoint");
  net.SetParameters(params);
  return net;
}

TrainResult Train(std::span<const PolicySample> dataset, const TrainConfig& config) {
  if (dataset.empty()) throw Error(ErrorCode::kInvalidArgument, "empty training set");
  const int features = static_cast<int>(dataset.front().state_features.size());
  return Train(dataset, config,
               ValueNetwork::Initialized(ValueNetwork::DefaultLayers(features), config.rng_seed));
}

TrainResult Train(std::span<const PolicySample> dataset, const TrainConfig& config,
                  ValueNetwork initial) {
  if (config.batch_size <= 0 || config.max_epochs < 0 || !(config.learning_rate > 0.0)) {
    throw Error(ErrorCode::kInvalidArgument, "invalid training configuration");
  }
  if (static_cast<int>(dataset.size()) < config.batch_size) {
    throw Error(ErrorCode::kInvalidArgument,
                "dataset has " + std::to_string(dataset.size()) + " samples, batch size is " +
                    std::to_string(config.batch_size));
  }
  const int f = initial.input_size();
  const auto n = static_cast<Eigen::Index>(dataset.size());
  Eigen::MatrixXd inputs(f, n);
  std::vector<int> actions(dataset.size());
  std::vector<double> targets(dataset.size());
  for (Eigen::Index i = 0; i < n; ++i) {
    const auto& s = dataset[static_cast<size_t>(i)];
    if (static_cast<int>(s.state_features.size()) != f) {
      throw Error(ErrorCode::kDimensionMismatch, "sample feature length does not match the network");
    }
    for (int r = 0; r < f; ++r) inputs(r, i) = s.state_features[static_cast<size_t>(r)];
    actions[static_cast<size_t>(i)] = static_cast<int>(Index(s.transform));
    targets[static_cast<size_t>(i)] = s.reward;
  }

  TrainResult result{std::move(initial), 0.0, {}};
  ValueNetwork& net = result.net;
  result.initial_loss = net.LossAndGradient(inputs, actions, targets, nullptr);
  std::mt19937_64 rng(config.rng_seed);
  std::vector<Eigen::Index> order(static_cast<size_t>(n));
  std::iota(order.begin(), order.end(), 0);
  std::vector<double> params = net.Parameters();
  std::vector<double> grad;
  for (int epoch = 0; epoch < config.max_epochs; ++epoch) {
    std::shuffle(order.begin(), order.end(), rng);
    for (Eigen::Index start = 0; start < n; start += config.batch_size) {
      const Eigen::Index len = std::min<Eigen::Index>(config.batch_size, n - start);
      Eigen::MatrixXd batch(f, len);
      std::vector<int> batch_actions(static_cast<size_t>(len));
      std::vector<double> batch_targets(static_cast<size_t>(len));
      for (Eigen::Index j = 0; j < len; ++j) {
        const Eigen::Index src = order[static_cast<size_t>(start + j)];
        batch.col(j) = inputs.col(src);
        batch_actions[static_cast<size_t>(j)] = actions[static_cast<size_t>(src)];
        batch_targets[static_cast<size_t>(j)] = targets[static_cast<size_t>(src)];
      }
      const double loss = net.LossAndGradient(batch, batch_actions, batch_targets, &grad);
      if (!std::isfinite(loss)) {
        std::ostringstream msg;
        msg << "loss became " << loss << " at epoch " << epoch << ", batch starting at " << start
            << " (learning rate " << config.learning_rate << ")";
        throw Error(ErrorCode::kNumerical, msg.str());
      }
      for (size_t p = 0; p < params.size(); ++p) params[p] -= config.learning_rate * grad[p];
      net.SetParameters(params);
    }
    const double epoch_loss = net.LossAndGradient(inputs, actions, targets, nullptr);
    if (!std::isfinite(epoch_loss)) {
      throw Error(ErrorCode::kNumerical, "loss became non-finite after epoch " + std::to_string(epoch) +
                                             " (learning rate " + std::to_string(config.learning_rate) + ")");
    }
    result.loss_curve.push_back(epoch_loss);
  }
  return result;
}

TransformProbabilities SelectProbabilities(const ValueNetwork& net, std::span<const double> features) {
  return ProbabilitiesFromRewards(net.Forward(features));
}

}  // namespace halmit
