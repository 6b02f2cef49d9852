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

#include "ddsh/gradcheck.h"

#include <algorithm>
#include <cmath>
#include <random>

#include "ddsh/featnet.h"

namespace ddsh {

GradCheckReport RunGradientCheck(const GradCheckOptions& options) {
  FeatureNet net(options.sizes, options.seed);
  std::mt19937_64 rng(options.seed ^ 0x5eedf00dULL);
  std::normal_distribution<double> normal(0.0, 1.0);
  std::uniform_real_distribution<double> weight_dist(0.25, 1.0);

  std::vector<double> x(net.input_dim());
  for (auto& v : x) v = normal(rng);

  const size_t c = net.code_length();
  const double target = options.target_scale > 0.0 ? options.target_scale : static_cast<double>(c);
  std::vector<std::vector<int8_t>> codes(options.num_anchors, std::vector<int8_t>(c));
  std::vector<Anchor> anchors;
  for (auto& code : codes) {
    for (auto& b : code) b = (rng() >> 63) ? int8_t{1} : int8_t{-1};
    anchors.push_back(Anchor{code, (rng() >> 63) ? 1 : -1, weight_dist(rng)});
  }

  const auto pass = net.Forward(std::span<const double>(x));
  auto analytic = Backward(net, pass, LossGradientA(pass.a, anchors, target));
  if (options.corrupt) {
    auto& g = analytic.weight.back().front();
    g = g * 1.01 + 1e-3;
  }

  auto loss_at = [&](const FeatureNet& probe) {
    return RelaxedLoss(probe.Forward(std::span<const double>(x)).a, anchors, target);
  };

  // Numeric gradients first, so the error floor can use the overall scale.
  NetGradients numeric = NetGradients::ZerosLike(net);
  FeatureNet probe = net;
  const double h = options.step;
  auto central = [&](double& param) {
    const double saved = param;
    param = saved + h;
    const double up = loss_at(probe);
    param = saved - h;
    const double down = loss_at(probe);
    param = saved;
    return (up - down) / (2.0 * h);
  };
  for (size_t l = 0; l < probe.num_layers(); ++l) {
    auto& layer = probe.mutable_layers()[l];
    for (size_t i = 0; i < layer.weight.size(); ++i) numeric.weight[l][i] = central(layer.weight[i]);
    for (size_t i = 0; i < layer.bias.size(); ++i) numeric.bias[l][i] = central(layer.bias[i]);
  }

  double scale = 0.0;
  for (size_t l = 0; l < net.num_layers(); ++l) {
    for (const double g : analytic.weight[l]) scale = std::max(scale, std::abs(g));
    for (const double g : analytic.bias[l]) scale = std::max(scale, std::abs(g));
  }
  const double floor = std::max(1e-3 * scale, 1e-12);
  auto rel = [floor](double a, double n) {
    return std::abs(a - n) / std::max({std::abs(a), std::abs(n), floor});
  };

  GradCheckReport report;
  for (size_t l = 0; l < net.num_layers(); ++l) {
    LayerGradError err;
    for (size_t i = 0; i < analytic.weight[l].size(); ++i) {
      err.weight = std::max(err.weight, rel(analytic.weight[l][i], numeric.weight[l][i]));
    }
    for (size_t i = 0; i < analytic.bias[l].size(); ++i) {
      err.bias = std::max(err.bias, rel(analytic.bias[l][i], numeric.bias[l][i]));
    }
    report.parameters_checked += analytic.weight[l].size() + analytic.bias[l].size();
    report.max_error = std::max({report.max_error, err.weight, err.bias});
    report.layers.push_back(err);
  }
  report.passed = report.max_error < options.tolerance;
  return report;
}

}  // namespace ddsh
