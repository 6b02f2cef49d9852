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

#ifndef DDSH_GRADCHECK_H_
#define DDSH_GRADCHECK_H_

// Finite-difference verification of the relaxed-loss gradients through a
// randomly initialized network.

#include <cstddef>
#include <cstdint>
#include <vector>

namespace ddsh {

struct GradCheckOptions {
  std::vector<size_t> sizes = {16, 64, 64, 8};
  uint64_t seed = 1;
  size_t num_anchors = 5;
  double step = 1e-5;
  double tolerance = 1e-5;
  double target_scale = 0.0;  // <= 0 means the code length
  // Test hook: perturbs one analytic gradient entry so the check must fail.
  bool corrupt = false;
};

struct LayerGradError {
  double weight = 0.0;
  double bias = 0.0;
};

struct GradCheckReport {
  std::vector<LayerGradError> layers;  // max relative error per layer
  double max_error = 0.0;
  size_t parameters_checked = 0;
  bool passed = false;
};

// |analytic - numeric| / max(|analytic|, |numeric|, 1e-3 * scale), where scale
// is the largest gradient magnitude in the network.
GradCheckReport RunGradientCheck(const GradCheckOptions& options);

}  // namespace ddsh

#endif  // DDSH_GRADCHECK_H_
