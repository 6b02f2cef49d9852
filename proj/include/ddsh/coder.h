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

#ifndef DDSH_CODER_H_
#define DDSH_CODER_H_

// Discrete coding: per-bit binary quadratic programs over the sampled
// columns, and the solvers used to minimize them.

#include <cstddef>
#include <cstdint>
#include <optional>
#include <random>
#include <span>
#include <vector>

#include "ddsh/supervision.h"

namespace ddsh {

// n x c matrix over {-1, +1}.
class CodeMatrix {
 public:
  CodeMatrix() = default;
  // All entries +1.
  CodeMatrix(size_t rows, size_t bits);
  CodeMatrix(size_t rows, size_t bits, std::vector<int8_t> entries);

  static CodeMatrix Random(size_t rows, size_t bits, std::mt19937_64& rng);

  size_t rows() const { return rows_; }
  size_t bits() const { return bits_; }
  int at(size_t i, size_t k) const { return entries_[i * bits_ + k]; }
  void set(size_t i, size_t k, int value);
  std::span<const int8_t> row(size_t i) const { return {entries_.data() + i * bits_, bits_}; }
  void SetRow(size_t i, std::span<const int8_t> values);
  const std::vector<int8_t>& entries() const { return entries_; }

  CodeMatrix Select(std::span<const size_t> indices) const;

  friend bool operator==(const CodeMatrix&, const CodeMatrix&) = default;

 private:
  size_t rows_ = 0;
  size_t bits_ = 0;
  std::vector<int8_t> entries_;
};

// sign(x) with sign(0) := +1.
inline int8_t SignCode(double x) { return x >= 0.0 ? int8_t{1} : int8_t{-1}; }

// min_b  b^T Q b + b^T p  over b in {-1,+1}^m, for one bit of all omega points.
// Q is symmetric with zero diagonal, stored row-major.
struct BqpInstance {
  size_t bit = 1;  // 1-based
  size_t size = 0;
  std::vector<double> q;
  std::vector<double> p;

  double Q(size_t i, size_t j) const { return q[i * size + j]; }
  double Objective(std::span<const int8_t> b) const;
};

// Builds the BQP for bit `bit` (1-based). Residuals use bits 1..bit-1 of the
// current codes; gamma rows contribute through their current bit values.
// `target_scale` multiplies S_ij in the inner-product target.
BqpInstance BuildBqp(size_t bit, const CodeMatrix& codes, const SimilarityOracle& sim,
                     const SampleSplit& split, double target_scale);

inline constexpr size_t kMaxExactBqpSize = 20;

// Global minimizer by enumeration. Ties go to the lexicographically smallest
// vector with +1 ordered before -1. Throws ConfigError above kMaxExactBqpSize.
std::vector<int8_t> SolveBqpExact(const BqpInstance& inst);

// Best-improvement single-flip descent from `start`. Every accepted flip
// strictly lowers the objective; `trace` (optional) receives the objective
// after each step, starting with the objective of `start`.
std::vector<int8_t> DescendBqp(const BqpInstance& inst, std::vector<int8_t> start,
                               std::vector<double>* trace = nullptr);

// Descent from `init` plus restarts-1 descents from seeded random starts;
// the best result wins, earlier restarts winning ties.
std::vector<int8_t> SolveBqpLocal(const BqpInstance& inst, std::span<const int8_t> init,
                                  size_t restarts, uint64_t seed);

enum class SolverMode {
  kAuto,   // exact up to kAutoExactLimit points, local search above
  kExact,
  kLocal,
};

inline constexpr size_t kAutoExactLimit = 16;

struct CoderOptions {
  double target_scale = 0.0;  // <= 0 means "use the code length c"
  SolverMode mode = SolverMode::kAuto;
  size_t restarts = 20;
  uint64_t seed = 0;
};

struct CoderSweepStats {
  double loss_before = 0.0;
  double loss_after = 0.0;
};

// One sweep over bits 1..c, each solved against the prefix residual. Only
// rows in split.omega are modified.
CoderSweepStats OptimizeCodes(CodeMatrix& codes, const SimilarityOracle& sim,
                              const SampleSplit& split, const CoderOptions& options);

// Sampled objective: sum over (i in omega, j in gamma) plus ordered pairs
// i != j in omega of w_ij (b_i^T b_j - target_scale * S_ij)^2. With
// `bit_prefix` = k, inner products use bits 1..k only.
double SampledLoss(const CodeMatrix& codes, const SimilarityOracle& sim,
                   const SampleSplit& split, double target_scale,
                   std::optional<size_t> bit_prefix = std::nullopt);

}  // namespace ddsh

#endif  // DDSH_CODER_H_
