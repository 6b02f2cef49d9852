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

#include "ddsh/coder.h"

#include <algorithm>
#include <cmath>
#include <random>

#include <gtest/gtest.h>

#include "ddsh/errors.h"
#include "oracles.h"

namespace ddsh {
namespace {

using testing::BitsFromMask;
using testing::BqpValue;
using testing::EnumerateBqpMin;
using testing::RandomIntegerBqp;

std::vector<int8_t> ToInt8(const std::vector<int>& b) { return {b.begin(), b.end()}; }
std::vector<int> ToInt(std::span<const int8_t> b) { return {b.begin(), b.end()}; }

BqpInstance MakeInstance(std::vector<double> q, std::vector<double> p) {
  BqpInstance inst;
  inst.size = p.size();
  inst.q = std::move(q);
  inst.p = std::move(p);
  return inst;
}

LabelSet RandomLabels(std::mt19937_64& rng, size_t n, uint32_t classes, size_t max_per_point) {
  std::vector<std::vector<uint32_t>> raw(n);
  for (auto& set : raw) {
    const size_t count = 1 + rng() % max_per_point;
    for (size_t k = 0; k < count; ++k) set.push_back(static_cast<uint32_t>(rng() % classes));
  }
  return LabelSet(raw);
}

testing::IntCodes ToIntCodes(const CodeMatrix& codes) {
  testing::IntCodes out(codes.rows(), std::vector<int>(codes.bits()));
  for (size_t i = 0; i < codes.rows(); ++i) {
    for (size_t k = 0; k < codes.bits(); ++k) out[i][k] = codes.at(i, k);
  }
  return out;
}

TEST(BuildBqpTest, FirstBitSimilarPair) {
  const SimilarityOracle sim(LabelSet({{0}, {0}}));
  const CodeMatrix codes(2, 2);
  const SampleSplit split{{0, 1}, {}, 2};
  const auto inst = BuildBqp(1, codes, sim, split, 2.0);
  ASSERT_EQ(inst.size, 2u);
  EXPECT_EQ(inst.Q(0, 1), -4.0);
  EXPECT_EQ(inst.Q(1, 0), -4.0);
  EXPECT_EQ(inst.Q(0, 0), 0.0);
  EXPECT_EQ(inst.Q(1, 1), 0.0);
  EXPECT_EQ(inst.p, (std::vector<double>{0.0, 0.0}));
}

TEST(BuildBqpTest, RejectsBitOutOfRange) {
  const SimilarityOracle sim(LabelSet({{0}, {1}, {0}}));
  const CodeMatrix codes(3, 2);
  const SampleSplit split{{0}, {1, 2}, 3};
  EXPECT_THROW(BuildBqp(0, codes, sim, split, 2.0), DataError);
  EXPECT_THROW(BuildBqp(3, codes, sim, split, 2.0), DataError);
  EXPECT_THROW(BuildBqp(1, CodeMatrix(2, 2), sim, split, 2.0), DataError);
}

// The quadratic form must equal the prefix-truncated sampled loss up to a
// constant that does not depend on the bit column being solved.
TEST(BuildBqpTest, QuadraticFormMatchesTruncatedLoss) {
  std::mt19937_64 rng(5);
  for (int trial = 0; trial < 30; ++trial) {
    const size_t n = 7;
    const size_t c = 3;
    const size_t bit = 2;
    const SimilarityOracle sim(RandomLabels(rng, n, 3, 2), WeightPolicy::kReduce);
    CodeMatrix codes = CodeMatrix::Random(n, c, rng);
    const SampleSplit split{{0, 2, 4, 6}, {1, 3, 5}, n};
    const auto inst = BuildBqp(bit, codes, sim, split, static_cast<double>(c));
    for (size_t i = 0; i < inst.size; ++i) EXPECT_EQ(inst.Q(i, i), 0.0);

    double offset = 0.0;
    for (uint32_t mask = 0; mask < 16; ++mask) {
      const auto b = BitsFromMask(mask, 4);
      for (size_t a = 0; a < 4; ++a) codes.set(split.omega[a], bit - 1, b[a]);
      const double loss = testing::BruteSampledLoss(
          ToIntCodes(codes), [&](size_t i, size_t j) { return sim.Similarity(i, j); },
          [&](size_t i, size_t j) { return sim.Weight(i, j); }, split.omega, split.gamma,
          static_cast<double>(c), bit);
      const double diff = BqpValue(inst.q, inst.p, b) - loss;
      if (mask == 0) offset = diff;
      EXPECT_NEAR(diff, offset, 1e-9) << "trial " << trial << " mask " << mask;
    }
  }
}

TEST(SolveBqpExactTest, IndependentSigns) {
  EXPECT_EQ(SolveBqpExact(MakeInstance({0, 0, 0, 0}, {4, -2})), (std::vector<int8_t>{-1, 1}));
}

TEST(SolveBqpExactTest, TieBreakPrefersPlusOne) {
  EXPECT_EQ(SolveBqpExact(MakeInstance({0}, {0})), (std::vector<int8_t>{1}));
  // All four assignments tie; lexicographically first is all +1.
  EXPECT_EQ(SolveBqpExact(MakeInstance({0, 0, 0, 0}, {0, 0})), (std::vector<int8_t>{1, 1}));
  // (+1,+1) and (-1,-1) tie at -2; the +1-first one wins.
  EXPECT_EQ(SolveBqpExact(MakeInstance({0, -1, -1, 0}, {0, 0})), (std::vector<int8_t>{1, 1}));
  // Only the first coordinate is free: (+1, -1) beats (-1, -1).
  EXPECT_EQ(SolveBqpExact(MakeInstance({0, 0, 0, 0}, {0, 2})), (std::vector<int8_t>{1, -1}));
}

TEST(SolveBqpExactTest, RejectsOversizedInstance) {
  const size_t m = kMaxExactBqpSize + 1;
  EXPECT_THROW(SolveBqpExact(MakeInstance(std::vector<double>(m * m, 0.0),
                                          std::vector<double>(m, 0.0))),
               ConfigError);
}

TEST(SolveBqpExactTest, MatchesEnumeration) {
  std::mt19937_64 rng(17);
  for (int trial = 0; trial < 50; ++trial) {
    std::vector<double> q, p;
    RandomIntegerBqp(rng, 10, q, p);
    const auto inst = MakeInstance(q, p);
    const auto b = SolveBqpExact(inst);
    EXPECT_EQ(BqpValue(q, p, ToInt(b)), EnumerateBqpMin(q, p));
  }
}

TEST(SolveBqpLocalTest, MatchesOracleOnMostInstances) {
  std::mt19937_64 rng(99);
  int optimal = 0;
  for (int trial = 0; trial < 200; ++trial) {
    std::vector<double> q, p;
    RandomIntegerBqp(rng, 10, q, p);
    const auto inst = MakeInstance(q, p);
    std::vector<int8_t> init(10);
    for (auto& v : init) v = (rng() & 1) ? 1 : -1;
    const auto b = SolveBqpLocal(inst, init, 20, rng());
    const double value = BqpValue(q, p, ToInt(b));
    EXPECT_LE(value, BqpValue(q, p, ToInt(init)));
    optimal += value == EnumerateBqpMin(q, p);
  }
  EXPECT_GE(optimal, 190);
}

TEST(SolveBqpLocalTest, OptimalInitReturnedUnchanged) {
  std::mt19937_64 rng(4);
  for (int trial = 0; trial < 20; ++trial) {
    std::vector<double> q, p;
    RandomIntegerBqp(rng, 8, q, p);
    const auto inst = MakeInstance(q, p);
    const auto best = SolveBqpExact(inst);
    EXPECT_EQ(SolveBqpLocal(inst, best, 20, trial), best);
  }
}

TEST(SolveBqpLocalTest, DescentIsStrictlyDecreasing) {
  std::mt19937_64 rng(8);
  for (int trial = 0; trial < 50; ++trial) {
    std::vector<double> q, p;
    RandomIntegerBqp(rng, 12, q, p);
    const auto inst = MakeInstance(q, p);
    std::vector<int8_t> start(12);
    for (auto& v : start) v = (rng() & 1) ? 1 : -1;
    std::vector<double> trace;
    const auto end = DescendBqp(inst, start, &trace);
    ASSERT_FALSE(trace.empty());
    EXPECT_EQ(trace.front(), BqpValue(q, p, ToInt(start)));
    EXPECT_EQ(trace.back(), BqpValue(q, p, ToInt(end)));
    for (size_t s = 1; s < trace.size(); ++s) EXPECT_LT(trace[s], trace[s - 1]);
    // Local minimum: no single flip improves.
    for (size_t a = 0; a < 12; ++a) {
      auto flipped = ToInt(end);
      flipped[a] = -flipped[a];
      EXPECT_GE(BqpValue(q, p, flipped), trace.back());
    }
  }
}

TEST(SolveBqpLocalTest, DeterministicGivenSeed) {
  std::mt19937_64 rng(21);
  std::vector<double> q, p;
  RandomIntegerBqp(rng, 14, q, p);
  const auto inst = MakeInstance(q, p);
  const std::vector<int8_t> init(14, 1);
  EXPECT_EQ(SolveBqpLocal(inst, init, 10, 3), SolveBqpLocal(inst, init, 10, 3));
}

TEST(SampledLossTest, OppositePairSimilar) {
  const SimilarityOracle sim(LabelSet({{0}, {0}}));
  const CodeMatrix codes(2, 4, {1, 1, 1, 1, -1, -1, -1, -1});
  const SampleSplit split{{0}, {1}, 2};
  EXPECT_DOUBLE_EQ(SampledLoss(codes, sim, split, 4.0), 64.0);
}

TEST(SampledLossTest, IdenticalCodesAllSimilarIsZero) {
  const SimilarityOracle sim(LabelSet({{1}, {1}, {1}, {1}, {1}}));
  const CodeMatrix codes(5, 6);
  const SampleSplit split{{0, 3}, {1, 2, 4}, 5};
  EXPECT_DOUBLE_EQ(SampledLoss(codes, sim, split, 6.0), 0.0);
}

TEST(SampledLossTest, MatchesBruteForce) {
  std::mt19937_64 rng(31);
  for (int trial = 0; trial < 25; ++trial) {
    const size_t n = 12;
    const size_t c = 5;
    const SimilarityOracle sim(RandomLabels(rng, n, 4, 2), WeightPolicy::kReduce);
    const CodeMatrix codes = CodeMatrix::Random(n, c, rng);
    const auto split = SampleColumns(n, 4, rng());
    for (size_t prefix = 0; prefix <= c; ++prefix) {
      const double brute = testing::BruteSampledLoss(
          ToIntCodes(codes), [&](size_t i, size_t j) { return sim.Similarity(i, j); },
          [&](size_t i, size_t j) { return sim.Weight(i, j); }, split.omega, split.gamma,
          static_cast<double>(c), prefix);
      EXPECT_NEAR(SampledLoss(codes, sim, split, static_cast<double>(c), prefix), brute,
                  1e-9 * std::max(1.0, brute));
    }
    EXPECT_THROW(SampledLoss(codes, sim, split, 5.0, c + 1), DataError);
  }
}

TEST(OptimizeCodesTest, SweepDoesNotIncreaseLoss) {
  std::mt19937_64 rng(12);
  for (int trial = 0; trial < 30; ++trial) {
    const size_t n = 20;
    const SimilarityOracle sim(RandomLabels(rng, n, 3, 1));
    CodeMatrix codes = CodeMatrix::Random(n, 4, rng);
    const auto split = SampleColumns(n, 8, rng());
    const double before = SampledLoss(codes, sim, split, 4.0);
    CoderOptions options;
    options.mode = SolverMode::kExact;
    const auto stats = OptimizeCodes(codes, sim, split, options);
    EXPECT_DOUBLE_EQ(stats.loss_before, before);
    EXPECT_NEAR(stats.loss_after, SampledLoss(codes, sim, split, 4.0), 1e-9);
    EXPECT_LE(stats.loss_after, stats.loss_before + 1e-9);
  }
}

TEST(OptimizeCodesTest, LocalModeAlsoMonotoneOnLargerOmega) {
  std::mt19937_64 rng(13);
  for (int trial = 0; trial < 10; ++trial) {
    const size_t n = 80;
    const SimilarityOracle sim(RandomLabels(rng, n, 4, 1));
    CodeMatrix codes = CodeMatrix::Random(n, 8, rng);
    const auto split = SampleColumns(n, 30, rng());
    CoderOptions options;
    options.seed = trial;
    const auto stats = OptimizeCodes(codes, sim, split, options);
    EXPECT_LE(stats.loss_after, stats.loss_before + 1e-9);
    for (const auto v : codes.entries()) EXPECT_TRUE(v == 1 || v == -1);
  }
}

TEST(OptimizeCodesTest, AllSimilarWithoutGammaGivesIdenticalRows) {
  std::mt19937_64 rng(2);
  for (int trial = 0; trial < 10; ++trial) {
    const SimilarityOracle sim(LabelSet({{0}, {0}, {0}}));
    CodeMatrix codes = CodeMatrix::Random(3, 2, rng);
    const SampleSplit split{{0, 1, 2}, {}, 3};
    OptimizeCodes(codes, sim, split, CoderOptions{.mode = SolverMode::kExact});
    for (size_t i = 0; i < 3; ++i) {
      for (size_t j = 0; j < 3; ++j) {
        int dot = 0;
        for (size_t k = 0; k < 2; ++k) dot += codes.at(i, k) * codes.at(j, k);
        EXPECT_EQ(dot, 2);
      }
    }
    EXPECT_DOUBLE_EQ(SampledLoss(codes, sim, split, 2.0), 0.0);
  }
}

TEST(OptimizeCodesTest, SecondExactSweepIsFixedPoint) {
  std::mt19937_64 rng(44);
  const size_t n = 30;
  const SimilarityOracle sim(RandomLabels(rng, n, 2, 1));
  CodeMatrix codes = CodeMatrix::Random(n, 6, rng);
  const auto split = SampleColumns(n, 10, 1);
  CoderOptions options{.mode = SolverMode::kExact};
  OptimizeCodes(codes, sim, split, options);
  const CodeMatrix once = codes;
  OptimizeCodes(codes, sim, split, options);
  EXPECT_EQ(codes, once);
}

TEST(CodeMatrixTest, RejectsNonBinaryEntries) {
  EXPECT_THROW(CodeMatrix(1, 2, {1, 0}), DataError);
  CodeMatrix codes(1, 2);
  EXPECT_THROW(codes.set(0, 0, 2), DataError);
  EXPECT_EQ(SignCode(0.0), 1);
  EXPECT_EQ(SignCode(-1e-300), -1);
}

}  // namespace
}  // namespace ddsh
