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

#include "ddsh/featnet.h"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <numeric>
#include <random>
#include <string>

#include "ddsh/binary_io.h"
#include "ddsh/errors.h"

namespace ddsh {
namespace {

constexpr std::string_view kModelMagic = "DDNN";
constexpr uint32_t kModelVersion = 1;

void CheckSizes(const std::vector<size_t>& sizes) {
  if (sizes.size() < 2) throw ConfigError("network needs at least input and output sizes");
  for (const size_t s : sizes) {
    if (s == 0) throw ConfigError("network layer sizes must be >= 1");
  }
}

bool AllFinite(const std::vector<double>& v) {
  return std::all_of(v.begin(), v.end(), [](double x) { return std::isfinite(x); });
}

}  // namespace

FeatureNet::FeatureNet(const std::vector<size_t>& sizes, uint64_t seed) {
  CheckSizes(sizes);
  std::mt19937_64 rng(seed);
  for (size_t l = 0; l + 1 < sizes.size(); ++l) {
    DenseLayer layer{sizes[l], sizes[l + 1], {}, {}};
    const double limit = std::sqrt(6.0 / static_cast<double>(layer.in + layer.out));
    std::uniform_real_distribution<double> uniform(-limit, limit);
    layer.weight.resize(layer.in * layer.out);
    for (auto& w : layer.weight) w = uniform(rng);
    layer.bias.assign(layer.out, 0.0);
    layers_.push_back(std::move(layer));
  }
}

FeatureNet::FeatureNet(std::vector<DenseLayer> layers) : layers_(std::move(layers)) {
  if (layers_.empty()) throw DataError("network has no layers");
  for (size_t l = 0; l < layers_.size(); ++l) {
    const auto& layer = layers_[l];
    if (layer.in == 0 || layer.out == 0 || layer.weight.size() != layer.in * layer.out ||
        layer.bias.size() != layer.out) {
      throw DataError("layer " + std::to_string(l) + " has inconsistent shape");
    }
    if (l > 0 && layers_[l - 1].out != layer.in) {
      throw DataError("layer " + std::to_string(l) + " input size does not match layer " +
                      std::to_string(l - 1) + " output size");
    }
  }
}

FeatureNet FeatureNet::Zeros(const std::vector<size_t>& sizes) {
  CheckSizes(sizes);
  std::vector<DenseLayer> layers;
  for (size_t l = 0; l + 1 < sizes.size(); ++l) {
    layers.push_back({sizes[l], sizes[l + 1], std::vector<double>(sizes[l] * sizes[l + 1], 0.0),
                      std::vector<double>(sizes[l + 1], 0.0)});
  }
  return FeatureNet(std::move(layers));
}

std::vector<size_t> FeatureNet::sizes() const {
  std::vector<size_t> out{layers_.front().in};
  for (const auto& layer : layers_) out.push_back(layer.out);
  return out;
}

ForwardPass FeatureNet::Forward(std::span<const double> x) const {
  if (x.size() != input_dim()) {
    throw DataError("dimension mismatch: network expects " + std::to_string(input_dim()) +
                    " features, got " + std::to_string(x.size()));
  }
  ForwardPass pass;
  pass.inputs.reserve(layers_.size());
  pass.pre.reserve(layers_.size());
  pass.inputs.emplace_back(x.begin(), x.end());
  for (size_t l = 0; l < layers_.size(); ++l) {
    const auto& layer = layers_[l];
    const auto& in = pass.inputs[l];
    std::vector<double> pre(layer.bias);
    for (size_t o = 0; o < layer.out; ++o) {
      const double* w = layer.weight.data() + o * layer.in;
      double acc = 0.0;
      for (size_t i = 0; i < layer.in; ++i) acc += w[i] * in[i];
      pre[o] += acc;
    }
    if (l + 1 < layers_.size()) {
      std::vector<double> next(pre.size());
      for (size_t o = 0; o < pre.size(); ++o) next[o] = pre[o] > 0.0 ? pre[o] : 0.0;
      pass.inputs.push_back(std::move(next));
    }
    pass.pre.push_back(std::move(pre));
  }
  pass.z = pass.pre.back();
  if (!AllFinite(pass.z)) throw DivergenceError("network output is not finite");
  pass.a.resize(pass.z.size());
  for (size_t k = 0; k < pass.z.size(); ++k) pass.a[k] = std::tanh(pass.z[k]);
  return pass;
}

ForwardPass FeatureNet::Forward(std::span<const float> x) const {
  const std::vector<double> widened(x.begin(), x.end());
  return Forward(std::span<const double>(widened));
}

std::vector<int8_t> FeatureNet::Encode(std::span<const float> x) const {
  const auto pass = Forward(x);
  std::vector<int8_t> code(pass.z.size());
  for (size_t k = 0; k < code.size(); ++k) code[k] = SignCode(pass.z[k]);
  return code;
}

CodeMatrix FeatureNet::EncodeAll(const FeatureMatrix& features) const {
  std::vector<int8_t> entries;
  entries.reserve(features.rows() * code_length());
  for (size_t i = 0; i < features.rows(); ++i) {
    const auto code = Encode(features.row(i));
    entries.insert(entries.end(), code.begin(), code.end());
  }
  return CodeMatrix(features.rows(), code_length(), std::move(entries));
}

void FeatureNet::CheckFinite() const {
  for (size_t l = 0; l < layers_.size(); ++l) {
    if (!AllFinite(layers_[l].weight) || !AllFinite(layers_[l].bias)) {
      throw DivergenceError("non-finite parameter in layer " + std::to_string(l));
    }
  }
}

NetGradients NetGradients::ZerosLike(const FeatureNet& net) {
  NetGradients g;
  for (const auto& layer : net.layers()) {
    g.weight.emplace_back(layer.weight.size(), 0.0);
    g.bias.emplace_back(layer.bias.size(), 0.0);
  }
  return g;
}

void NetGradients::Add(const NetGradients& other, double scale) {
  for (size_t l = 0; l < weight.size(); ++l) {
    for (size_t i = 0; i < weight[l].size(); ++i) weight[l][i] += scale * other.weight[l][i];
    for (size_t i = 0; i < bias[l].size(); ++i) bias[l][i] += scale * other.bias[l][i];
  }
}

void NetGradients::Scale(double factor) {
  for (auto& w : weight) {
    for (auto& v : w) v *= factor;
  }
  for (auto& b : bias) {
    for (auto& v : b) v *= factor;
  }
}

double RelaxedLoss(std::span<const double> a, std::span<const Anchor> anchors,
                   double target_scale) {
  double loss = 0.0;
  for (const auto& anchor : anchors) {
    if (anchor.code.size() != a.size()) throw DataError("anchor code length mismatch");
    double dot = 0.0;
    for (size_t k = 0; k < a.size(); ++k) dot += a[k] * anchor.code[k];
    const double r = dot - target_scale * anchor.similarity;
    loss += anchor.weight * r * r;
  }
  return loss;
}

std::vector<double> LossGradientA(std::span<const double> a, std::span<const Anchor> anchors,
                                  double target_scale) {
  if (anchors.empty()) throw DataError("loss gradient needs at least one anchor");
  std::vector<double> grad(a.size(), 0.0);
  for (const auto& anchor : anchors) {
    if (anchor.code.size() != a.size()) throw DataError("anchor code length mismatch");
    double dot = 0.0;
    for (size_t k = 0; k < a.size(); ++k) dot += a[k] * anchor.code[k];
    const double coeff = 2.0 * anchor.weight * (dot - target_scale * anchor.similarity);
    for (size_t k = 0; k < a.size(); ++k) grad[k] += coeff * anchor.code[k];
  }
  return grad;
}

NetGradients Backward(const FeatureNet& net, const ForwardPass& pass,
                      std::span<const double> upstream_da) {
  const auto& layers = net.layers();
  if (upstream_da.size() != net.code_length() || pass.a.size() != net.code_length() ||
      pass.inputs.size() != layers.size()) {
    throw DataError("backward: dimension mismatch with forward pass");
  }
  NetGradients grads = NetGradients::ZerosLike(net);
  std::vector<double> delta(upstream_da.size());
  for (size_t k = 0; k < delta.size(); ++k) {
    delta[k] = upstream_da[k] * (1.0 - pass.a[k] * pass.a[k]);
  }
  for (size_t l = layers.size(); l-- > 0;) {
    const auto& layer = layers[l];
    const auto& in = pass.inputs[l];
    auto& gw = grads.weight[l];
    for (size_t o = 0; o < layer.out; ++o) {
      const double d = delta[o];
      if (d == 0.0) continue;
      double* row = gw.data() + o * layer.in;
      for (size_t i = 0; i < layer.in; ++i) row[i] = d * in[i];
    }
    grads.bias[l] = delta;
    if (l == 0) break;
    std::vector<double> prev(layer.in, 0.0);
    for (size_t o = 0; o < layer.out; ++o) {
      const double d = delta[o];
      if (d == 0.0) continue;
      const double* w = layer.weight.data() + o * layer.in;
      for (size_t i = 0; i < layer.in; ++i) prev[i] += w[i] * d;
    }
    const auto& pre = pass.pre[l - 1];
    for (size_t i = 0; i < prev.size(); ++i) {
      if (pre[i] <= 0.0) prev[i] = 0.0;
    }
    delta = std::move(prev);
  }
  return grads;
}

GradReduction ParseGradReduction(std::string_view name) {
  if (name == "mean") return GradReduction::kMean;
  if (name == "sum") return GradReduction::kSum;
  throw ConfigError("unknown grad_reduction \"" + std::string(name) + "\"");
}

std::string_view GradReductionName(GradReduction reduction) {
  return reduction == GradReduction::kSum ? "sum" : "mean";
}

void ValidateOptimizer(const OptimizerState& opt) {
  if (!(opt.learning_rate >= 0.0) || !std::isfinite(opt.learning_rate)) {
    throw ConfigError("learning rate must be finite and >= 0");
  }
  if (!(opt.weight_decay >= 0.0) || !std::isfinite(opt.weight_decay)) {
    throw ConfigError("weight decay must be finite and >= 0");
  }
  if (opt.batch_size < 1) throw ConfigError("minibatch size must be >= 1");
}

void SgdStep(FeatureNet& net, const NetGradients& grads, const OptimizerState& opt) {
  auto& layers = net.mutable_layers();
  if (grads.weight.size() != layers.size() || grads.bias.size() != layers.size()) {
    throw DataError("gradient shape does not match network");
  }
  const double lr = opt.learning_rate;
  for (size_t l = opt.first_trainable_layer; l < layers.size(); ++l) {
    auto& layer = layers[l];
    if (grads.weight[l].size() != layer.weight.size() ||
        grads.bias[l].size() != layer.bias.size()) {
      throw DataError("gradient shape does not match layer " + std::to_string(l));
    }
    for (size_t i = 0; i < layer.weight.size(); ++i) {
      layer.weight[i] -= lr * (grads.weight[l][i] + opt.weight_decay * layer.weight[i]);
    }
    for (size_t i = 0; i < layer.bias.size(); ++i) layer.bias[i] -= lr * grads.bias[l][i];
    if (!AllFinite(layer.weight) || !AllFinite(layer.bias)) {
      throw DivergenceError("non-finite parameter in layer " + std::to_string(l) +
                            " after update");
    }
  }
}

EpochResult TrainEpoch(FeatureNet& net, CodeMatrix& codes, const SampleSplit& split,
                       const FeatureMatrix& features, const SimilarityOracle& sim,
                       const OptimizerState& opt, double target_scale, uint64_t seed) {
  ValidateOptimizer(opt);
  if (features.rows() != split.n || codes.rows() != split.n || sim.size() != split.n) {
    throw DataError("train_epoch: features, codes, supervision and split disagree on n");
  }
  if (codes.bits() != net.code_length()) throw DataError("train_epoch: code length mismatch");
  if (split.omega.empty()) throw DataError("train_epoch: omega is empty");

  std::vector<size_t> order = split.gamma;
  std::mt19937_64 rng(seed);
  std::shuffle(order.begin(), order.end(), rng);

  EpochResult result;
  std::vector<Anchor> anchors(split.omega.size(), Anchor{{}, 1, 1.0});
  for (size_t start = 0; start < order.size(); start += opt.batch_size) {
    const size_t end = std::min(order.size(), start + opt.batch_size);
    NetGradients batch = NetGradients::ZerosLike(net);
    for (size_t t = start; t < end; ++t) {
      const size_t j = order[t];
      for (size_t a = 0; a < split.omega.size(); ++a) {
        const size_t i = split.omega[a];
        const auto pair = sim.Pair(i, j);
        anchors[a] = Anchor{codes.row(i), pair.similarity, pair.weight};
      }
      const auto pass = net.Forward(features.row(j));
      result.loss += RelaxedLoss(pass.a, anchors, target_scale);
      const auto da = LossGradientA(pass.a, anchors, target_scale);
      batch.Add(Backward(net, pass, da));
    }
    if (!std::isfinite(result.loss)) throw DivergenceError("epoch loss is not finite");
    if (opt.reduction == GradReduction::kMean) {
      batch.Scale(1.0 / static_cast<double>(end - start));
    }
    SgdStep(net, batch, opt);
    ++result.minibatches;
  }

  for (const size_t j : split.gamma) codes.SetRow(j, net.Encode(features.row(j)));
  return result;
}

SaturationHistogram TanhSaturationHistogram(const FeatureNet& net, const FeatureMatrix& features,
                                            size_t bins) {
  if (bins < 1) throw ConfigError("histogram needs at least one bin");
  SaturationHistogram hist;
  hist.counts.assign(bins, 0);
  uint64_t saturated = 0;
  for (size_t i = 0; i < features.rows(); ++i) {
    const auto pass = net.Forward(features.row(i));
    for (const double a : pass.a) {
      const double mag = std::abs(a);
      const auto bin = std::min(bins - 1, static_cast<size_t>(mag * static_cast<double>(bins)));
      ++hist.counts[bin];
      if (mag > 0.8) ++saturated;
      ++hist.total;
    }
  }
  hist.saturation_fraction =
      hist.total == 0 ? 0.0 : static_cast<double>(saturated) / static_cast<double>(hist.total);
  return hist;
}

void SaveModel(const std::filesystem::path& path, const FeatureNet& net) {
  std::ofstream out(path, std::ios::out | std::ios::binary | std::ios::trunc);
  if (!out) throw DataError("cannot write " + path.string());
  binary_io::WriteMagic(out, kModelMagic);
  binary_io::WriteUnsigned<uint32_t>(out, kModelVersion);
  binary_io::WriteUnsigned<uint32_t>(out, static_cast<uint32_t>(net.num_layers()));
  for (const auto& layer : net.layers()) {
    binary_io::WriteUnsigned<uint64_t>(out, layer.out);
    binary_io::WriteUnsigned<uint64_t>(out, layer.in);
    for (const double w : layer.weight) binary_io::WriteF64(out, w);
    for (const double b : layer.bias) binary_io::WriteF64(out, b);
  }
  if (!out) throw DataError("write failed: " + path.string());
}

FeatureNet LoadModel(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::in | std::ios::binary);
  if (!in) throw DataError("cannot open " + path.string());
  binary_io::ExpectMagic(in, kModelMagic);
  binary_io::ExpectVersion(in, kModelVersion);
  const auto count = binary_io::ReadUnsigned<uint32_t>(in, "layer count");
  if (count == 0) throw DataError("model has no layers");
  std::vector<DenseLayer> layers;
  for (uint32_t l = 0; l < count; ++l) {
    DenseLayer layer;
    layer.out = binary_io::ReadUnsigned<uint64_t>(in, "layer rows");
    layer.in = binary_io::ReadUnsigned<uint64_t>(in, "layer cols");
    if (layer.out == 0 || layer.in == 0 || layer.out > (1u << 24) || layer.in > (1u << 24)) {
      throw DataError("implausible layer shape in model file");
    }
    layer.weight.resize(layer.out * layer.in);
    for (auto& w : layer.weight) w = binary_io::ReadF64(in, "weights");
    layer.bias.resize(layer.out);
    for (auto& b : layer.bias) b = binary_io::ReadF64(in, "biases");
    layers.push_back(std::move(layer));
  }
  FeatureNet net(std::move(layers));
  net.CheckFinite();
  return net;
}

}  // namespace ddsh
