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
#include <bit>
#include <cmath>
#include <limits>
#include <string>

#include "ddsh/errors.h"
#include "ddsh/rng.h"

namespace ddsh {
namespace {

// Supervision restricted to the sampled columns, precomputed once per sweep.
struct SampledSupervision {
  size_t m = 0;      // |omega|
  size_t g = 0;      // |gamma|
  std::vector<double> oo_target;  // m x m, target_scale * S
  std::vector<double> oo_weight;
  std::vector<double> og_target;  // m x g
  std::vector<double> og_weight;
};

SampledSupervision Gather(const SimilarityOracle& sim, const SampleSplit& split,
                          double target_scale) {
  SampledSupervision s;
  s.m = split.omega.size();
  s.g = split.gamma.size();
  s.oo_target.resize(s.m * s.m);
  s.oo_weight.resize(s.m * s.m);
  s.og_target.resize(s.m * s.g);
  s.og_weight.resize(s.m * s.g);
  for (size_t a = 0; a < s.m; ++a) {
    for (size_t b = 0; b < s.m; ++b) {
      const auto pair = sim.Pair(split.omega[a], split.omega[b]);
      s.oo_target[a * s.m + b] = target_scale * pair.similarity;
      s.oo_weight[a * s.m + b] = pair.weight;
    }
    for (size_t l = 0; l < s.g; ++l) {
      const auto pair = sim.Pair(split.omega[a], split.gamma[l]);
      s.og_target[a * s.g + l] = target_scale * pair.similarity;
      s.og_weight[a * s.g + l] = pair.weight;
    }
  }
  return s;
}

void CheckSplit(const CodeMatrix& codes, const SimilarityOracle& sim, const SampleSplit& split) {
  if (codes.rows() != split.n || sim.size() != split.n) {
    throw DataError("dimension mismatch: codes have " + std::to_string(codes.rows()) +
                    " rows, supervision " + std::to_string(sim.size()) + ", split n = " +
                    std::to_string(split.n));
  }
  for (const size_t i : split.omega) {
    if (i >= split.n) throw DataError("omega index out of range");
  }
  for (const size_t i : split.gamma) {
    if (i >= split.n) throw DataError("gamma index out of range");
  }
}

// Inner product over bits [0, prefix).
int PrefixDot(std::span<const int8_t> a, std::span<const int8_t> b, size_t prefix) {
  int dot = 0;
  for (size_t m = 0; m < prefix; ++m) dot += a[m] * b[m];
  return dot;
}

BqpInstance BuildFromSampled(size_t bit, const CodeMatrix& codes, const SampleSplit& split,
                             const SampledSupervision& s) {
  const size_t k = bit - 1;  // 0-based column being solved
  BqpInstance inst;
  inst.bit = bit;
  inst.size = s.m;
  inst.q.assign(s.m * s.m, 0.0);
  inst.p.assign(s.m, 0.0);
  for (size_t a = 0; a < s.m; ++a) {
    const auto row_a = codes.row(split.omega[a]);
    for (size_t b = a + 1; b < s.m; ++b) {
      const auto row_b = codes.row(split.omega[b]);
      const int residual = PrefixDot(row_a, row_b, k);
      const double v = -2.0 * s.oo_weight[a * s.m + b] * (s.oo_target[a * s.m + b] - residual);
      inst.q[a * s.m + b] = v;
      inst.q[b * s.m + a] = v;
    }
    double pa = 0.0;
    for (size_t l = 0; l < s.g; ++l) {
      const auto row_l = codes.row(split.gamma[l]);
      const int residual = PrefixDot(row_l, row_a, k);
      pa += s.og_weight[a * s.g + l] * row_l[k] * (s.og_target[a * s.g + l] - residual);
    }
    inst.p[a] = -2.0 * pa;
  }
  return inst;
}

double LossFromSampled(const CodeMatrix& codes, const SampleSplit& split,
                       const SampledSupervision& s, size_t prefix) {
  double loss = 0.0;
  for (size_t a = 0; a < s.m; ++a) {
    const auto row_a = codes.row(split.omega[a]);
    for (size_t l = 0; l < s.g; ++l) {
      const double r = PrefixDot(row_a, codes.row(split.gamma[l]), prefix) -
                       s.og_target[a * s.g + l];
      loss += s.og_weight[a * s.g + l] * r * r;
    }
    for (size_t b = 0; b < s.m; ++b) {
      if (b == a) continue;
      const double r = PrefixDot(row_a, codes.row(split.omega[b]), prefix) -
                       s.oo_target[a * s.m + b];
      loss += s.oo_weight[a * s.m + b] * r * r;
    }
  }
  return loss;
}

bool Tied(double a, double b) {
  return std::abs(a - b) <= 1e-9 * std::max({1.0, std::abs(a), std::abs(b)});
}

void CheckBits(std::span<const int8_t> b, size_t size) {
  if (b.size() != size) throw DataError("bit vector length mismatch");
  for (const int8_t v : b) {
    if (v != 1 && v != -1) throw DataError("bit vector entries must be -1 or +1");
  }
}

}  // namespace

CodeMatrix::CodeMatrix(size_t rows, size_t bits)
    : rows_(rows), bits_(bits), entries_(rows * bits, int8_t{1}) {}

CodeMatrix::CodeMatrix(size_t rows, size_t bits, std::vector<int8_t> entries)
    : rows_(rows), bits_(bits), entries_(std::move(entries)) {
  if (entries_.size() != rows_ * bits_) throw DataError("code matrix size mismatch");
  for (const int8_t v : entries_) {
    if (v != 1 && v != -1) throw DataError("code entries must be -1 or +1");
  }
}

CodeMatrix CodeMatrix::Random(size_t rows, size_t bits, std::mt19937_64& rng) {
  std::vector<int8_t> entries(rows * bits);
  for (auto& e : entries) e = (rng() >> 63) ? int8_t{1} : int8_t{-1};
  return CodeMatrix(rows, bits, std::move(entries));
}

void CodeMatrix::set(size_t i, size_t k, int value) {
  if (value != 1 && value != -1) throw DataError("code entries must be -1 or +1");
  entries_.at(i * bits_ + k) = static_cast<int8_t>(value);
}

void CodeMatrix::SetRow(size_t i, std::span<const int8_t> values) {
  if (values.size() != bits_) throw DataError("code row length mismatch");
  for (size_t k = 0; k < bits_; ++k) set(i, k, values[k]);
}

CodeMatrix CodeMatrix::Select(std::span<const size_t> indices) const {
  std::vector<int8_t> out;
  out.reserve(indices.size() * bits_);
  for (const size_t i : indices) {
    if (i >= rows_) throw DataError("code row index out of range");
    const auto r = row(i);
    out.insert(out.end(), r.begin(), r.end());
  }
  return CodeMatrix(indices.size(), bits_, std::move(out));
}

double BqpInstance::Objective(std::span<const int8_t> b) const {
  double value = 0.0;
  for (size_t i = 0; i < size; ++i) {
    double qi = 0.0;
    for (size_t j = 0; j < size; ++j) qi += q[i * size + j] * b[j];
    value += b[i] * (qi + p[i]);
  }
  return value;
}

BqpInstance BuildBqp(size_t bit, const CodeMatrix& codes, const SimilarityOracle& sim,
                     const SampleSplit& split, double target_scale) {
  if (bit < 1 || bit > codes.bits()) {
    throw DataError("bit index " + std::to_string(bit) + " out of range [1, " +
                    std::to_string(codes.bits()) + "]");
  }
  CheckSplit(codes, sim, split);
  return BuildFromSampled(bit, codes, split, Gather(sim, split, target_scale));
}

std::vector<int8_t> SolveBqpExact(const BqpInstance& inst) {
  const size_t m = inst.size;
  if (m > kMaxExactBqpSize) {
    throw ConfigError("exact BQP solver limited to " + std::to_string(kMaxExactBqpSize) +
                      " variables, got " + std::to_string(m));
  }
  if (m == 0) return {};

  // Gray-code walk over all 2^m sign vectors with O(m) incremental updates.
  // Element a maps to mask bit (m-1-a) so that a smaller mask is the
  // lexicographically smaller vector under +1 < -1.
  std::vector<int8_t> b(m, 1);
  std::vector<double> field(m, 0.0);  // (Q b)_i
  for (size_t i = 0; i < m; ++i) {
    for (size_t j = 0; j < m; ++j) field[i] += inst.Q(i, j);
  }
  double value = 0.0;
  for (size_t i = 0; i < m; ++i) value += field[i] + inst.p[i];

  uint32_t mask = 0;
  double best = value;
  uint32_t best_mask = 0;
  const uint64_t total = uint64_t{1} << m;
  for (uint64_t step = 1; step < total; ++step) {
    const auto flip_bit = static_cast<size_t>(std::countr_zero(step));
    const size_t a = m - 1 - flip_bit;
    const double old = b[a];
    value += -4.0 * old * field[a] - 2.0 * old * inst.p[a];
    b[a] = static_cast<int8_t>(-b[a]);
    for (size_t j = 0; j < m; ++j) field[j] -= 2.0 * old * inst.Q(j, a);
    mask ^= uint32_t{1} << flip_bit;
    if ((value < best && !Tied(value, best)) || (Tied(value, best) && mask < best_mask)) {
      best = value;
      best_mask = mask;
    }
  }
  std::vector<int8_t> out(m);
  for (size_t a = 0; a < m; ++a) {
    out[a] = (best_mask >> (m - 1 - a)) & 1U ? int8_t{-1} : int8_t{1};
  }
  return out;
}

std::vector<int8_t> DescendBqp(const BqpInstance& inst, std::vector<int8_t> start,
                               std::vector<double>* trace) {
  const size_t m = inst.size;
  CheckBits(start, m);
  std::vector<double> field(m, 0.0);
  for (size_t i = 0; i < m; ++i) {
    for (size_t j = 0; j < m; ++j) field[i] += inst.Q(i, j) * start[j];
  }
  double value = inst.Objective(start);
  if (trace != nullptr) trace->assign(1, value);
  while (true) {
    size_t best_index = m;
    double best_delta = 0.0;
    for (size_t a = 0; a < m; ++a) {
      const double delta = -4.0 * start[a] * field[a] - 2.0 * start[a] * inst.p[a];
      if (delta < best_delta) {
        best_delta = delta;
        best_index = a;
      }
    }
    if (best_index == m || Tied(value + best_delta, value)) break;
    const double old = start[best_index];
    start[best_index] = static_cast<int8_t>(-start[best_index]);
    for (size_t j = 0; j < m; ++j) field[j] -= 2.0 * old * inst.Q(j, best_index);
    value += best_delta;
    if (trace != nullptr) trace->push_back(value);
  }
  return start;
}

std::vector<int8_t> SolveBqpLocal(const BqpInstance& inst, std::span<const int8_t> init,
                                  size_t restarts, uint64_t seed) {
  CheckBits(init, inst.size);
  std::vector<int8_t> best = DescendBqp(inst, {init.begin(), init.end()});
  double best_value = inst.Objective(best);
  std::mt19937_64 rng(seed);
  for (size_t r = 1; r < restarts; ++r) {
    std::vector<int8_t> start(inst.size);
    for (auto& v : start) v = (rng() >> 63) ? int8_t{1} : int8_t{-1};
    auto candidate = DescendBqp(inst, std::move(start));
    const double value = inst.Objective(candidate);
    if (value < best_value && !Tied(value, best_value)) {
      best_value = value;
      best = std::move(candidate);
    }
  }
  return best;
}

CoderSweepStats OptimizeCodes(CodeMatrix& codes, const SimilarityOracle& sim,
                              const SampleSplit& split, const CoderOptions& options) {
  CheckSplit(codes, sim, split);
  const size_t c = codes.bits();
  const double target_scale =
      options.target_scale > 0.0 ? options.target_scale : static_cast<double>(c);
  const auto sampled = Gather(sim, split, target_scale);

  CoderSweepStats stats;
  stats.loss_before = LossFromSampled(codes, split, sampled, c);

  const size_t m = split.omega.size();
  const bool exact = options.mode == SolverMode::kExact ||
                     (options.mode == SolverMode::kAuto && m <= kAutoExactLimit);
  std::vector<int8_t> column(m);
  for (size_t bit = 1; bit <= c; ++bit) {
    const auto inst = BuildFromSampled(bit, codes, split, sampled);
    std::vector<int8_t> solved;
    if (exact) {
      solved = SolveBqpExact(inst);
    } else {
      for (size_t a = 0; a < m; ++a) column[a] = static_cast<int8_t>(codes.at(split.omega[a], bit - 1));
      solved = SolveBqpLocal(inst, column, std::max<size_t>(options.restarts, 1),
                             DeriveSeed(options.seed, {bit}));
    }
    for (size_t a = 0; a < m; ++a) codes.set(split.omega[a], bit - 1, solved[a]);
  }
  stats.loss_after = LossFromSampled(codes, split, sampled, c);
  return stats;
}

double SampledLoss(const CodeMatrix& codes, const SimilarityOracle& sim, const SampleSplit& split,
                   double target_scale, std::optional<size_t> bit_prefix) {
  CheckSplit(codes, sim, split);
  const size_t prefix = bit_prefix.value_or(codes.bits());
  if (prefix > codes.bits()) throw DataError("bit prefix exceeds code length");
  return LossFromSampled(codes, split, Gather(sim, split, target_scale), prefix);
}

}  // namespace ddsh
