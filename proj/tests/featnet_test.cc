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

#include <cmath>
#include <filesystem>
#include <limits>
#include <random>

#include <gtest/gtest.h>

#include "ddsh/errors.h"
#include "ddsh/gradcheck.h"

namespace ddsh {
namespace {

namespace fs = std::filesystem;

std::vector<int8_t> ToVector(std::span<const int8_t> s) { return {s.begin(), s.end()}; }

FeatureNet Linear(size_t in, size_t out, std::vector<double> weight, std::vector<double> bias) {
  return FeatureNet({DenseLayer{in, out, std::move(weight), std::move(bias)}});
}

double Loss(const FeatureNet& net, std::span<const double> x, std::span<const Anchor> anchors,
            double scale) {
  return RelaxedLoss(net.Forward(x).a, anchors, scale);
}

TEST(ForwardTest, ZeroNetGivesZeroOutput) {
  const auto net = FeatureNet::Zeros({3, 5, 2});
  const std::vector<double> x = {1.0, -2.0, 0.5};
  const auto pass = net.Forward(x);
  EXPECT_EQ(pass.z, (std::vector<double>{0.0, 0.0}));
  EXPECT_EQ(pass.a, (std::vector<double>{0.0, 0.0}));
}

TEST(ForwardTest, IdentityLayerAppliesTanh) {
  const auto net = Linear(2, 2, {1, 0, 0, 1}, {0, 0});
  const std::vector<double> x = {3.0, -3.0};
  const auto pass = net.Forward(x);
  EXPECT_NEAR(pass.a[0], 0.9951, 1e-4);
  EXPECT_NEAR(pass.a[1], -0.9951, 1e-4);
  EXPECT_DOUBLE_EQ(pass.a[0], std::tanh(3.0));
}

TEST(ForwardTest, OutputStrictlyInsideUnitInterval) {
  const FeatureNet net({4, 8, 6}, 3);
  std::mt19937_64 rng(1);
  std::normal_distribution<double> normal(0.0, 2.0);
  for (int trial = 0; trial < 100; ++trial) {
    std::vector<double> x(4);
    for (auto& v : x) v = normal(rng);
    for (const double a : net.Forward(x).a) {
      EXPECT_GT(a, -1.0);
      EXPECT_LT(a, 1.0);
    }
  }
}

TEST(ForwardTest, RejectsWrongDimensionAndNonFinite) {
  const auto net = FeatureNet::Zeros({3, 2});
  const std::vector<double> x = {1.0, 2.0};
  EXPECT_THROW(net.Forward(x), DataError);
  auto broken = Linear(1, 1, {std::nan("")}, {0.0});
  const std::vector<double> one = {1.0};
  EXPECT_THROW(broken.Forward(one), DivergenceError);
}

TEST(ForwardTest, HiddenLayersUseRectifier) {
  // in -> hidden (weight -1) -> out (weight 1): negative inputs pass, positive are cut.
  const FeatureNet net({DenseLayer{1, 1, {-1.0}, {0.0}}, DenseLayer{1, 1, {1.0}, {0.0}}});
  const std::vector<double> pos = {2.0};
  const std::vector<double> neg = {-2.0};
  EXPECT_EQ(net.Forward(pos).z[0], 0.0);
  EXPECT_EQ(net.Forward(neg).z[0], 2.0);
}

TEST(LossGradientTest, ZeroAtMatchingCode) {
  const std::vector<int8_t> b = {1, -1, 1};
  const std::vector<Anchor> anchors = {Anchor{b, 1, 1.0}};
  const std::vector<double> a = {1.0, -1.0, 1.0};
  EXPECT_EQ(LossGradientA(a, anchors, 3.0), (std::vector<double>{0.0, 0.0, 0.0}));
}

TEST(LossGradientTest, ZeroInputGivesScaledAnchor) {
  const std::vector<int8_t> b = {1, -1, 1, -1};
  const std::vector<Anchor> anchors = {Anchor{b, 1, 1.0}};
  const std::vector<double> a(4, 0.0);
  EXPECT_EQ(LossGradientA(a, anchors, 4.0), (std::vector<double>{-8.0, 8.0, -8.0, 8.0}));
}

TEST(LossGradientTest, RejectsEmptyAnchors) {
  const std::vector<double> a(2, 0.0);
  EXPECT_THROW(LossGradientA(a, {}, 2.0), DataError);
}

TEST(LossGradientTest, MatchesFiniteDifferences) {
  std::mt19937_64 rng(7);
  std::uniform_real_distribution<double> uni(-0.9, 0.9);
  for (int trial = 0; trial < 20; ++trial) {
    const size_t c = 6;
    std::vector<std::vector<int8_t>> codes(5, std::vector<int8_t>(c));
    std::vector<Anchor> anchors;
    for (auto& code : codes) {
      for (auto& v : code) v = (rng() & 1) ? 1 : -1;
      anchors.push_back(Anchor{code, (rng() & 1) ? 1 : -1, 0.25 + 0.75 * (rng() % 4) / 3.0});
    }
    std::vector<double> a(c);
    for (auto& v : a) v = uni(rng);
    const auto grad = LossGradientA(a, anchors, static_cast<double>(c));
    const double h = 1e-5;
    for (size_t m = 0; m < c; ++m) {
      auto up = a;
      auto down = a;
      up[m] += h;
      down[m] -= h;
      const double numeric =
          (RelaxedLoss(up, anchors, 6.0) - RelaxedLoss(down, anchors, 6.0)) / (2 * h);
      EXPECT_LT(std::abs(grad[m] - numeric) / std::max({std::abs(grad[m]), std::abs(numeric), 1.0}),
                1e-6);
    }
  }
}

TEST(LossGradientTest, LinearInAnchorSet) {
  const std::vector<int8_t> b1 = {1, 1, -1};
  const std::vector<int8_t> b2 = {-1, 1, -1};
  const std::vector<Anchor> first = {Anchor{b1, 1, 1.0}};
  const std::vector<Anchor> second = {Anchor{b2, -1, 0.5}};
  const std::vector<Anchor> both = {first[0], second[0]};
  const std::vector<double> a = {0.2, -0.4, 0.7};
  const auto g1 = LossGradientA(a, first, 3.0);
  const auto g2 = LossGradientA(a, second, 3.0);
  const auto g = LossGradientA(a, both, 3.0);
  for (size_t m = 0; m < 3; ++m) EXPECT_NEAR(g[m], g1[m] + g2[m], 1e-12);
}

TEST(BackwardTest, TanhFactorAtZeroIsOne) {
  const auto net = FeatureNet::Zeros({2, 3});
  const std::vector<double> x = {0.5, -1.5};
  const auto pass = net.Forward(x);
  const std::vector<double> up = {1.0, -2.0, 3.0};
  const auto grads = Backward(net, pass, up);
  // dL/dbias of a single linear layer is dL/dz.
  EXPECT_EQ(grads.bias[0], up);
}

TEST(BackwardTest, SaturatedUnitHasVanishingGradient) {
  const auto net = Linear(1, 2, {100.0, 0.0}, {0.0, 0.0});
  const std::vector<double> x = {1.0};
  const auto grads = Backward(net, net.Forward(x), std::vector<double>{1.0, 1.0});
  EXPECT_LT(std::abs(grads.bias[0][0]), 1e-12);
  EXPECT_EQ(grads.bias[0][1], 1.0);
}

// Finite differences over every parameter, written against Forward and
// RelaxedLoss only.
TEST(BackwardTest, MatchesFiniteDifferencesOnTwoHiddenLayers) {
  FeatureNet net({5, 7, 6, 4}, 11);
  std::mt19937_64 rng(3);
  std::normal_distribution<double> normal(0.0, 1.0);
  std::vector<double> x(5);
  for (auto& v : x) v = normal(rng);
  std::vector<std::vector<int8_t>> codes(3, std::vector<int8_t>(4));
  std::vector<Anchor> anchors;
  for (auto& code : codes) {
    for (auto& v : code) v = (rng() & 1) ? 1 : -1;
    anchors.push_back(Anchor{code, (rng() & 1) ? 1 : -1, 1.0});
  }
  const auto pass = net.Forward(x);
  const auto grads = Backward(net, pass, LossGradientA(pass.a, anchors, 4.0));
  const double h = 1e-5;
  double worst = 0.0;
  for (size_t l = 0; l < net.num_layers(); ++l) {
    auto check = [&](double& param, double analytic) {
      const double saved = param;
      param = saved + h;
      const double up = Loss(net, x, anchors, 4.0);
      param = saved - h;
      const double down = Loss(net, x, anchors, 4.0);
      param = saved;
      const double numeric = (up - down) / (2 * h);
      const double denom = std::max({std::abs(analytic), std::abs(numeric), 1e-4});
      worst = std::max(worst, std::abs(analytic - numeric) / denom);
    };
    auto& layer = net.mutable_layers()[l];
    for (size_t p = 0; p < layer.weight.size(); ++p) check(layer.weight[p], grads.weight[l][p]);
    for (size_t p = 0; p < layer.bias.size(); ++p) check(layer.bias[p], grads.bias[l][p]);
  }
  EXPECT_LT(worst, 1e-5);
}

TEST(GradCheckTest, DefaultPassesAndCorruptionFails) {
  const auto report = RunGradientCheck(GradCheckOptions{});
  EXPECT_TRUE(report.passed);
  EXPECT_LT(report.max_error, 1e-5);
  EXPECT_EQ(report.layers.size(), 3u);
  EXPECT_EQ(report.parameters_checked, 16u * 64 + 64 + 64 * 64 + 64 + 64 * 8 + 8);

  GradCheckOptions corrupt;
  corrupt.corrupt = true;
  EXPECT_FALSE(RunGradientCheck(corrupt).passed);
}

TEST(SgdStepTest, UpdateRule) {
  auto net = Linear(1, 1, {1.0}, {1.0});
  auto grads = NetGradients::ZerosLike(net);
  OptimizerState opt;
  opt.learning_rate = 1.0;
  opt.weight_decay = 0.1;
  SgdStep(net, grads, opt);
  EXPECT_DOUBLE_EQ(net.layers()[0].weight[0], 0.9);
  EXPECT_DOUBLE_EQ(net.layers()[0].bias[0], 1.0);  // biases are not decayed
}

TEST(SgdStepTest, ZeroGradientNoDecayIsNoOp) {
  FeatureNet net({3, 4, 2}, 5);
  const FeatureNet before = net;
  OptimizerState opt;
  opt.weight_decay = 0.0;
  SgdStep(net, NetGradients::ZerosLike(net), opt);
  EXPECT_EQ(net, before);
}

TEST(SgdStepTest, TwoStepsEqualOneDoubledStep) {
  const auto base = Linear(2, 1, {0.5, -0.25}, {0.125});
  auto grads = NetGradients::ZerosLike(base);
  grads.weight[0] = {0.25, 0.5};
  grads.bias[0] = {-0.5};
  OptimizerState opt;
  opt.weight_decay = 0.0;
  opt.learning_rate = 0.125;
  auto twice = base;
  SgdStep(twice, grads, opt);
  SgdStep(twice, grads, opt);
  auto once = base;
  opt.learning_rate = 0.25;
  SgdStep(once, grads, opt);
  EXPECT_EQ(twice, once);
}

TEST(SgdStepTest, FrozenLayersUntouched) {
  FeatureNet net({3, 4, 2}, 5);
  const FeatureNet before = net;
  auto grads = NetGradients::ZerosLike(net);
  for (auto& g : grads.weight) std::fill(g.begin(), g.end(), 1.0);
  OptimizerState opt;
  opt.first_trainable_layer = 1;
  SgdStep(net, grads, opt);
  EXPECT_EQ(net.layers()[0], before.layers()[0]);
  EXPECT_NE(net.layers()[1], before.layers()[1]);
}

TEST(SgdStepTest, NonFiniteUpdateNamesLayer) {
  auto net = Linear(1, 1, {1.0}, {0.0});
  auto grads = NetGradients::ZerosLike(net);
  grads.weight[0][0] = std::numeric_limits<double>::infinity();
  try {
    SgdStep(net, grads, OptimizerState{});
    FAIL() << "expected DivergenceError";
  } catch (const DivergenceError& e) {
    EXPECT_NE(std::string(e.what()).find("layer 0"), std::string::npos) << e.what();
  }
}

TEST(EncodeTest, SignConvention) {
  const auto net = Linear(1, 3, {0.3, -0.7, 0.0}, {0.0, 0.0, 0.0});
  const std::vector<float> x = {1.0f};
  EXPECT_EQ(net.Encode(x), (std::vector<int8_t>{1, -1, 1}));
}

TEST(EncodeTest, InvariantToPositiveOutputScaling) {
  FeatureNet net({4, 6, 5}, 9);
  for (auto& b : net.mutable_layers().back().bias) b = 0.0;
  auto scaled = net;
  for (auto& w : scaled.mutable_layers().back().weight) w *= 3.5;
  std::mt19937_64 rng(2);
  std::normal_distribution<float> normal(0.0f, 1.0f);
  for (int trial = 0; trial < 50; ++trial) {
    std::vector<float> x(4);
    for (auto& v : x) v = normal(rng);
    EXPECT_EQ(net.Encode(x), scaled.Encode(x));
    const auto pass = net.Forward(std::span<const float>(x));
    const auto code = net.Encode(x);
    for (size_t m = 0; m < code.size(); ++m) EXPECT_EQ(code[m], SignCode(pass.a[m]));
  }
}

class TrainEpochTest : public ::testing::Test {
 protected:
  TrainEpochTest()
      : data_(GenerateBlobs(2, 50, 16, 1.0, 3)),
        sim_(data_.labels),
        split_(SampleColumns(100, 20, 4)) {
    std::mt19937_64 rng(5);
    codes_ = CodeMatrix::Random(100, 8, rng);
  }

  Dataset data_;
  SimilarityOracle sim_;
  SampleSplit split_;
  CodeMatrix codes_;
};

TEST_F(TrainEpochTest, ZeroLearningRateStillRefreshesCodes) {
  FeatureNet net({16, 32, 8}, 1);
  const FeatureNet before = net;
  OptimizerState opt;
  opt.learning_rate = 0.0;
  opt.batch_size = 16;
  const auto result = TrainEpoch(net, codes_, split_, data_.features, sim_, opt, 8.0, 1);
  EXPECT_EQ(net, before);
  EXPECT_EQ(result.minibatches, 5u);  // ceil(80 / 16)
  for (const size_t j : split_.gamma) {
    EXPECT_EQ(ToVector(codes_.row(j)), net.Encode(data_.features.row(j)));
  }
}

TEST_F(TrainEpochTest, DeterministicGivenSeed) {
  FeatureNet a({16, 32, 8}, 1);
  FeatureNet b = a;
  CodeMatrix ca = codes_;
  CodeMatrix cb = codes_;
  OptimizerState opt;
  opt.learning_rate = 1e-3;
  opt.batch_size = 32;
  TrainEpoch(a, ca, split_, data_.features, sim_, opt, 8.0, 7);
  TrainEpoch(b, cb, split_, data_.features, sim_, opt, 8.0, 7);
  EXPECT_EQ(a, b);
  EXPECT_EQ(ca, cb);
}

TEST_F(TrainEpochTest, OmegaRowsAreNotTouched) {
  FeatureNet net({16, 32, 8}, 1);
  const CodeMatrix before = codes_;
  TrainEpoch(net, codes_, split_, data_.features, sim_, OptimizerState{}, 8.0, 7);
  for (const size_t i : split_.omega) EXPECT_EQ(ToVector(codes_.row(i)), ToVector(before.row(i)));
}

TEST_F(TrainEpochTest, LossDecreasesOverFirstEpochs) {
  FeatureNet net({16, 64, 64, 8}, 1);
  OptimizerState opt;  // learning rate 1e-2
  opt.batch_size = 32;
  double previous = std::numeric_limits<double>::infinity();
  for (uint64_t epoch = 0; epoch < 5; ++epoch) {
    const auto result = TrainEpoch(net, codes_, split_, data_.features, sim_, opt, 8.0, epoch);
    EXPECT_LT(result.loss, previous) << "epoch " << epoch;
    previous = result.loss;
  }
}

TEST(HistogramTest, ZeroNetPutsEverythingInLowestBin) {
  const auto data = GenerateBlobs(2, 10, 4, 1.0, 1);
  const auto hist = TanhSaturationHistogram(FeatureNet::Zeros({4, 3}), data.features, 10);
  EXPECT_EQ(hist.counts[0], 60u);
  EXPECT_EQ(hist.total, 60u);
  EXPECT_EQ(hist.saturation_fraction, 0.0);
}

TEST(HistogramTest, MassIsConserved) {
  const auto data = GenerateBlobs(3, 10, 4, 1.0, 1);
  const auto hist = TanhSaturationHistogram(FeatureNet({4, 8, 5}, 2), data.features, 7);
  uint64_t sum = 0;
  for (const auto c : hist.counts) sum += c;
  EXPECT_EQ(sum, 30u * 5);
  EXPECT_EQ(hist.total, sum);
}

TEST(ModelFileTest, RoundTripIsBitExact) {
  const auto path = fs::temp_directory_path() / "ddsh_featnet_model.ddnn";
  const FeatureNet net({7, 5, 3, 2}, 42);
  SaveModel(path, net);
  EXPECT_EQ(LoadModel(path), net);
  fs::resize_file(path, fs::file_size(path) - 1);
  EXPECT_THROW(LoadModel(path), DataError);
  fs::remove(path);
}

}  // namespace
}  // namespace ddsh
