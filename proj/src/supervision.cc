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

#include "ddsh/supervision.h"

#include <algorithm>
#include <numeric>
#include <random>
#include <string>

#include <spdlog/spdlog.h>

#include "ddsh/errors.h"

namespace ddsh {

WeightPolicy ParseWeightPolicy(std::string_view name) {
  if (name == "uniform") return WeightPolicy::kUniform;
  if (name == "reduce") return WeightPolicy::kReduce;
  throw ConfigError("unknown multilabel weight policy \"" + std::string(name) + "\"");
}

std::string_view WeightPolicyName(WeightPolicy policy) {
  return policy == WeightPolicy::kReduce ? "reduce" : "uniform";
}

SimilarityOracle::SimilarityOracle(LabelSet labels, WeightPolicy policy)
    : labels_(std::move(labels)), policy_(policy) {}

void SimilarityOracle::CheckIndex(size_t i) const {
  if (i >= labels_.size()) {
    throw DataError("similarity index " + std::to_string(i) + " out of range (n = " +
                    std::to_string(labels_.size()) + ")");
  }
}

int SimilarityOracle::Similarity(size_t i, size_t j) const {
  CheckIndex(i);
  CheckIndex(j);
  return labels_.SharesLabel(i, j) ? 1 : -1;
}

double SimilarityOracle::Weight(size_t i, size_t j) const {
  CheckIndex(i);
  CheckIndex(j);
  if (policy_ == WeightPolicy::kUniform) return 1.0;
  if (labels_.labels(i).size() == 1 && labels_.labels(j).size() == 1) return 1.0;
  return 1.0 / static_cast<double>(labels_.UnionSize(i, j));
}

PairSupervision SimilarityOracle::Pair(size_t i, size_t j) const {
  return {Similarity(i, j), Weight(i, j)};
}

SampleSplit SampleColumns(size_t n, size_t omega_size, uint64_t seed) {
  if (omega_size < 1 || omega_size >= n) {
    throw ConfigError("omega_size must satisfy 1 <= omega_size < n (got " +
                      std::to_string(omega_size) + ", n = " + std::to_string(n) + ")");
  }
  std::vector<size_t> perm(n);
  std::iota(perm.begin(), perm.end(), size_t{0});
  std::mt19937_64 rng(seed);
  // Partial Fisher-Yates: the first omega_size slots become omega.
  for (size_t i = 0; i < omega_size; ++i) {
    std::uniform_int_distribution<size_t> pick(i, n - 1);
    std::swap(perm[i], perm[pick(rng)]);
  }
  SampleSplit split;
  split.n = n;
  split.omega.assign(perm.begin(), perm.begin() + static_cast<std::ptrdiff_t>(omega_size));
  split.gamma.assign(perm.begin() + static_cast<std::ptrdiff_t>(omega_size), perm.end());
  std::sort(split.omega.begin(), split.omega.end());
  std::sort(split.gamma.begin(), split.gamma.end());
  if (split.gamma.size() < split.omega.size()) {
    spdlog::warn("column sampling: |gamma| = {} is smaller than |omega| = {}",
                 split.gamma.size(), split.omega.size());
  }
  return split;
}

}  // namespace ddsh
