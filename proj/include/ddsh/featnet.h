// Copyright 2026 The DDSH Authors.
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

#ifndef DDSH_FEATNET_H_
#define DDSH_FEATNET_H_

// Fully-connected feature network F(x; theta) with a tanh-relaxed hash head,
// trained against fixed discrete anchor codes.

#include <cstddef>
#include <cstdint>
#include <filesystem>
#include <span>
#include <string_view>
#include <vector>

#include "ddsh/coder.h"
#include "ddsh/dataset.h"
#include "ddsh/supervision.h"

namespace ddsh {

// y = W x + b, with W stored row-major as out x in.
struct DenseLayer {
  size_t in = 0;
  size_t out = 0;
  std::vector<double> weight;
  std::vector<double> bias;

  friend bool operator==(const DenseLayer&, const DenseLayer&) = default;
};

// Intermediate values of one forward evaluation, kept for back-propagation.
struct ForwardPass {
  std::vector<std::vector<double>> inputs;  // inputs[l] feeds layer l
  std::vector<std::vector<double>> pre;     // pre-activations of layer l
  std::vector<double> z;                    // network output
  std::vector<double> a;                    // tanh(z)
};

// ReLU on hidden layers, identity on the output layer.
class FeatureNet {
 public:
  // Glorot-uniform weights, zero biases. sizes = {d, h1, ..., c}.
  FeatureNet(const std::vector<size_t>& sizes, uint64_t seed);
  explicit FeatureNet(std::vector<DenseLayer> layers);

  static FeatureNet Zeros(const std::vector<size_t>& sizes);

  size_t input_dim() const { return layers_.front().in; }
  size_t code_length() const { return layers_.back().out; }
  size_t num_layers() const { return layers_.size(); }
  std::vector<size_t> sizes() const;
  const std::vector<DenseLayer>& layers() const { return layers_; }
  std::vector<DenseLayer>& mutable_layers() { return layers_; }

  ForwardPass Forward(std::span<const double> x) const;
  ForwardPass Forward(std::span<const float> x) const;

  // sign(F(x)), sign(0) := +1.
  std::vector<int8_t> Encode(std::span<const float> x) const;
  CodeMatrix EncodeAll(const FeatureMatrix& features) const;

  // Throws DivergenceError naming the first layer with a non-finite value.
  void CheckFinite() const;

  friend bool operator==(const FeatureNet&, const FeatureNet&) = default;

 private:
  std::vector<DenseLayer> layers_;
};

struct NetGradients {
  std::vector<std::vector<double>> weight;
  std::vector<std::vector<double>> bias;

  static NetGradients ZerosLike(const FeatureNet& net);
  void Add(const NetGradients& other, double scale = 1.0);
  void Scale(double factor);
};

// One discrete anchor b_i with its supervision towards the point being coded.
struct Anchor {
  std::span<const int8_t> code;
  int similarity;
  double weight = 1.0;
};

// sum_i w_i (a^T b_i - target_scale * S_i)^2
double RelaxedLoss(std::span<const double> a, std::span<const Anchor> anchors,
                   double target_scale);

// d/da of RelaxedLoss: sum_i 2 w_i (a^T b_i - target_scale * S_i) b_i.
std::vector<double> LossGradientA(std::span<const double> a, std::span<const Anchor> anchors,
                                  double target_scale);

// Back-propagates dL/da through the tanh head (dL/dz = dL/da * (1 - a^2))
// and the network.
NetGradients Backward(const FeatureNet& net, const ForwardPass& pass,
                      std::span<const double> upstream_da);

enum class GradReduction { kMean, kSum };

GradReduction ParseGradReduction(std::string_view name);
std::string_view GradReductionName(GradReduction reduction);

struct OptimizerState {
  double learning_rate = 1e-2;
  double weight_decay = 5e-4;
  size_t batch_size = 128;
  GradReduction reduction = GradReduction::kMean;
  // Layers with index < first_trainable_layer stay frozen.
  size_t first_trainable_layer = 0;
};

void ValidateOptimizer(const OptimizerState& opt);

// theta <- theta - lr * (grad + decay * theta); biases are not decayed.
// Throws DivergenceError if any updated parameter is non-finite.
void SgdStep(FeatureNet& net, const NetGradients& grads, const OptimizerState& opt);

struct EpochResult {
  double loss = 0.0;        // relaxed omega x gamma loss summed over the epoch
  size_t minibatches = 0;
};

// One pass over gamma in shuffled minibatches of opt.batch_size. Each point is
// trained against every omega row of `codes` as an anchor. At the end of the
// epoch all gamma rows of `codes` are set to sign(F(x)) under the updated net.
EpochResult TrainEpoch(FeatureNet& net, CodeMatrix& codes, const SampleSplit& split,
                       const FeatureMatrix& features, const SimilarityOracle& sim,
                       const OptimizerState& opt, double target_scale, uint64_t seed);

struct SaturationHistogram {
  std::vector<uint64_t> counts;  // uniform bins over [0, 1] of |a|
  uint64_t total = 0;
  double saturation_fraction = 0.0;  // share of entries with |a| > 0.8
};

SaturationHistogram TanhSaturationHistogram(const FeatureNet& net, const FeatureMatrix& features,
                                            size_t bins);

void SaveModel(const std::filesystem::path& path, const FeatureNet& net);
FeatureNet LoadModel(const std::filesystem::path& path);

}  // namespace ddsh

#endif  // DDSH_FEATNET_H_
