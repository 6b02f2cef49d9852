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

#ifndef DDSH_TRAINER_H_
#define DDSH_TRAINER_H_

// Alternating optimization: column sampling, discrete coding of the sampled
// points, and feature-network epochs over the remaining points. Also hosts
// the frozen-feature variant and the random-projection baseline.

#include <cstddef>
#include <cstdint>
#include <string_view>
#include <vector>

#include "ddsh/coder.h"
#include "ddsh/dataset.h"
#include "ddsh/featnet.h"
#include "ddsh/supervision.h"

namespace ddsh {

enum class Variant { kDdsh, kDdsh0, kLsh };
enum class TargetScale { kOne, kCodeLength };

Variant ParseVariant(std::string_view name);
std::string_view VariantName(Variant v);
TargetScale ParseTargetScale(std::string_view name);  // "1" or "c"
std::string_view TargetScaleName(TargetScale s);

struct TrainConfig {
  size_t bits = 12;
  size_t omega_size = 100;
  size_t t_out = 3;
  size_t t_in = 50;
  size_t batch_size = 128;
  double learning_rate = 1e-2;
  double weight_decay = 5e-4;
  uint64_t seed = 0;
  TargetScale target_scale = TargetScale::kCodeLength;
  Variant variant = Variant::kDdsh;
  std::vector<size_t> hidden_layers = {64, 64};
  WeightPolicy multilabel_policy = WeightPolicy::kUniform;
  SolverMode solver = SolverMode::kAuto;
  size_t solver_restarts = 20;
  GradReduction grad_reduction = GradReduction::kMean;

  double TargetScaleValue() const {
    return target_scale == TargetScale::kOne ? 1.0 : static_cast<double>(bits);
  }
  // {input_dim, hidden..., bits}
  std::vector<size_t> LayerSizes(size_t input_dim) const;
};

// Throws ConfigError. `n` is the training-set size.
void ValidateConfig(const TrainConfig& cfg, size_t n);

enum class Phase { kCoder, kFeature };
std::string_view PhaseName(Phase phase);

struct LossRecord {
  size_t iter;   // 1-based
  size_t epoch;  // 1-based
  Phase phase;
  double loss;   // sampled loss with the current discrete codes
};

struct TrainedModel {
  FeatureNet net;
  CodeMatrix codes;  // training-set codes
  TrainConfig config;
  std::vector<LossRecord> trace;
  std::vector<CoderSweepStats> sweeps;  // one per coder phase, same split before/after
  SampleSplit final_split;
};

TrainedModel Train(const FeatureMatrix& features, const SimilarityOracle& sim,
                   const TrainConfig& cfg);

// Same as Train with every layer except the output projection frozen.
TrainedModel TrainDdsh0(const FeatureMatrix& features, const SimilarityOracle& sim,
                        const TrainConfig& cfg);

// Single-layer network with N(0, 1) weights and zero bias; codes = sign(Wx).
TrainedModel TrainLsh(const FeatureMatrix& features, const TrainConfig& cfg);

// Dispatches on cfg.variant.
TrainedModel TrainVariant(const FeatureMatrix& features, const SimilarityOracle& sim,
                          const TrainConfig& cfg);

}  // namespace ddsh

#endif  // DDSH_TRAINER_H_
