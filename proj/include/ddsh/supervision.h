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

#ifndef DDSH_SUPERVISION_H_
#define DDSH_SUPERVISION_H_

#include <cstddef>
#include <cstdint>
#include <string_view>
#include <vector>

#include "ddsh/dataset.h"

namespace ddsh {

// kReduce down-weights pairs involving a multi-label point by
// 1 / |labels(i) ∪ labels(j)|.
enum class WeightPolicy { kUniform, kReduce };

WeightPolicy ParseWeightPolicy(std::string_view name);
std::string_view WeightPolicyName(WeightPolicy policy);

struct PairSupervision {
  int similarity;  // -1 or +1
  double weight;   // in (0, 1]
};

// Lazily evaluated pairwise supervision S_ij = +1 iff i and j share a label.
// The n x n matrix is never materialized.
class SimilarityOracle {
 public:
  explicit SimilarityOracle(LabelSet labels, WeightPolicy policy = WeightPolicy::kUniform);

  size_t size() const { return labels_.size(); }
  WeightPolicy policy() const { return policy_; }
  const LabelSet& labels() const { return labels_; }

  int Similarity(size_t i, size_t j) const;
  double Weight(size_t i, size_t j) const;
  PairSupervision Pair(size_t i, size_t j) const;

 private:
  void CheckIndex(size_t i) const;

  LabelSet labels_;
  WeightPolicy policy_;
};

// Column-sampling partition of {0..n-1}. Both lists are sorted ascending.
struct SampleSplit {
  std::vector<size_t> omega;
  std::vector<size_t> gamma;
  size_t n = 0;
};

// Draws |omega| = omega_size indices uniformly without replacement; gamma is
// the complement. Requires 1 <= omega_size < n.
SampleSplit SampleColumns(size_t n, size_t omega_size, uint64_t seed);

}  // namespace ddsh

#endif  // DDSH_SUPERVISION_H_
