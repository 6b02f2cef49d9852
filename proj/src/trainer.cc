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

#include "ddsh/trainer.h"

#include <random>
#include <string>

#include <spdlog/spdlog.h>

#include "ddsh/errors.h"
#include "ddsh/rng.h"

namespace ddsh {
namespace {

// Sub-stream tags for DeriveSeed.
enum SeedTag : uint64_t {
  kNetInit = 1,
  kCodeInit = 2,
  kColumns = 3,
  kCoder = 4,
  kEpoch = 5,
  kProjection = 6,
};

TrainedModel RunAlternating(const FeatureMatrix& features, const SimilarityOracle& sim,
                            const TrainConfig& cfg, size_t first_trainable_layer) {
  ValidateConfig(cfg, features.rows());
  if (sim.size() != features.rows()) {
    throw DataError("features and labels disagree on n (" + std::to_string(features.rows()) +
                    " vs " + std::to_string(sim.size()) + ")");
  }
  const size_t n = features.rows();
  const double target = cfg.TargetScaleValue();

  FeatureNet net(cfg.LayerSizes(features.cols()), DeriveSeed(cfg.seed, {kNetInit}));
  std::mt19937_64 code_rng(DeriveSeed(cfg.seed, {kCodeInit}));
  CodeMatrix codes = CodeMatrix::Random(n, cfg.bits, code_rng);

  OptimizerState opt;
  opt.learning_rate = cfg.learning_rate;
  opt.weight_decay = cfg.weight_decay;
  opt.batch_size = cfg.batch_size;
  opt.reduction = cfg.grad_reduction;
  opt.first_trainable_layer = first_trainable_layer;

  TrainedModel model{net, codes, cfg, {}, {}, {}};
  for (size_t iter = 1; iter <= cfg.t_out; ++iter) {
    const auto split = SampleColumns(n, cfg.omega_size, DeriveSeed(cfg.seed, {kColumns, iter}));
    for (size_t epoch = 1; epoch <= cfg.t_in; ++epoch) {
      CoderOptions coder{target, cfg.solver, cfg.solver_restarts,
                         DeriveSeed(cfg.seed, {kCoder, iter, epoch})};
      const auto sweep = OptimizeCodes(model.codes, sim, split, coder);
      model.sweeps.push_back(sweep);
      model.trace.push_back({iter, epoch, Phase::kCoder, sweep.loss_after});

      const auto result = TrainEpoch(model.net, model.codes, split, features, sim, opt, target,
                                     DeriveSeed(cfg.seed, {kEpoch, iter, epoch}));
      const double loss = SampledLoss(model.codes, sim, split, target);
      model.trace.push_back({iter, epoch, Phase::kFeature, loss});
      spdlog::debug("iter {} epoch {}: coder {:.6g} -> {:.6g}, relaxed {:.6g}, sampled {:.6g}",
                    iter, epoch, sweep.loss_before, sweep.loss_after, result.loss, loss);
    }
    model.final_split = split;
    spdlog::info("iter {}/{}: sampled loss {:.6g}", iter, cfg.t_out, model.trace.back().loss);
  }
  return model;
}

}  // namespace

Variant ParseVariant(std::string_view name) {
  if (name == "ddsh") return Variant::kDdsh;
  if (name == "ddsh0") return Variant::kDdsh0;
  if (name == "lsh") return Variant::kLsh;
  throw ConfigError("unknown variant \"" + std::string(name) + "\"");
}

std::string_view VariantName(Variant v) {
  switch (v) {
    case Variant::kDdsh0:
      return "ddsh0";
    case Variant::kLsh:
      return "lsh";
    default:
      return "ddsh";
  }
}

TargetScale ParseTargetScale(std::string_view name) {
  if (name == "1") return TargetScale::kOne;
  if (name == "c") return TargetScale::kCodeLength;
  throw ConfigError("target_scale must be \"1\" or \"c\", got \"" + std::string(name) + "\"");
}

std::string_view TargetScaleName(TargetScale s) { return s == TargetScale::kOne ? "1" : "c"; }

std::string_view PhaseName(Phase phase) { return phase == Phase::kCoder ? "coder" : "feature"; }

std::vector<size_t> TrainConfig::LayerSizes(size_t input_dim) const {
  std::vector<size_t> sizes{input_dim};
  sizes.insert(sizes.end(), hidden_layers.begin(), hidden_layers.end());
  sizes.push_back(bits);
  return sizes;
}

void ValidateConfig(const TrainConfig& cfg, size_t n) {
  if (cfg.bits < 1) throw ConfigError("bits must be >= 1");
  if (cfg.variant == Variant::kLsh) return;
  if (cfg.t_out < 1) throw ConfigError("t_out must be >= 1");
  if (cfg.t_in < 1) throw ConfigError("t_in must be >= 1");
  if (cfg.omega_size < 1 || cfg.omega_size >= n) {
    throw ConfigError("omega_size must satisfy 1 <= omega_size < n (omega_size = " +
                      std::to_string(cfg.omega_size) + ", n = " + std::to_string(n) + ")");
  }
  if (cfg.batch_size < 1) throw ConfigError("batch must be >= 1");
  if (!(cfg.learning_rate >= 0.0)) throw ConfigError("lr must be >= 0");
  if (!(cfg.weight_decay >= 0.0)) throw ConfigError("weight_decay must be >= 0");
  for (const size_t h : cfg.hidden_layers) {
    if (h == 0) throw ConfigError("hidden layer sizes must be >= 1");
  }
  if ((cfg.solver == SolverMode::kExact) && cfg.omega_size > kMaxExactBqpSize) {
    throw ConfigError("exact solver needs omega_size <= " + std::to_string(kMaxExactBqpSize));
  }
}

TrainedModel Train(const FeatureMatrix& features, const SimilarityOracle& sim,
                   const TrainConfig& cfg) {
  return RunAlternating(features, sim, cfg, 0);
}

TrainedModel TrainDdsh0(const FeatureMatrix& features, const SimilarityOracle& sim,
                        const TrainConfig& cfg) {
  return RunAlternating(features, sim, cfg, cfg.hidden_layers.size());
}

TrainedModel TrainLsh(const FeatureMatrix& features, const TrainConfig& cfg) {
  if (cfg.bits < 1) throw ConfigError("bits must be >= 1");
  std::mt19937_64 rng(DeriveSeed(cfg.seed, {kProjection}));
  std::normal_distribution<double> normal(0.0, 1.0);
  DenseLayer layer{features.cols(), cfg.bits, std::vector<double>(features.cols() * cfg.bits),
                   std::vector<double>(cfg.bits, 0.0)};
  for (auto& w : layer.weight) w = normal(rng);
  FeatureNet net(std::vector<DenseLayer>{std::move(layer)});
  CodeMatrix codes = net.EncodeAll(features);
  return TrainedModel{std::move(net), std::move(codes), cfg, {}, {}, {}};
}

TrainedModel TrainVariant(const FeatureMatrix& features, const SimilarityOracle& sim,
                          const TrainConfig& cfg) {
  switch (cfg.variant) {
    case Variant::kDdsh0:
      return TrainDdsh0(features, sim, cfg);
    case Variant::kLsh:
      return TrainLsh(features, cfg);
    default:
      return Train(features, sim, cfg);
  }
}

}  // namespace ddsh
