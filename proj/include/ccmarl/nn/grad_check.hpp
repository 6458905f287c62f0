// Copyright 2026 The ccmarl Authors
// SPDX-License-Identifier: Apache-2.0
//
// Licensed under the Apache License, Version 2.0 (the "License");
// you may not use this file except in compliance with the License.
// You may obtain a copy of the License at
//
//     https://www.apache.org/licenses/LICENSE-2.0
//
// Unless required by applicable law or agreed to in writing, software
// distributed under the License is distributed on an "AS IS" BASIS,
// WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
// See the License for the specific language governing permissions and
// limitations under the License.

#pragma once

#include <cstddef>
#include <cstdint>
#include <functional>
#include <span>
#include <vector>

#include "ccmarl/nn/matrix.hpp"
#include "ccmarl/nn/mlp.hpp"

namespace ccmarl::nn {

struct GradCheckResult {
  double max_relative_error = 0.0;
  std::size_t compared = 0;
  std::size_t excluded = 0;  // perturbation crossed a relu kink
};

// Identifies the linear piece a piecewise-smooth function is evaluated on
// (for relu nets: the sign of every relu pre-activation, 0 counted as its own
// state). Central differences are meaningless across a change of piece.
using RegionFn = std::function<std::vector<std::int8_t>()>;

// Compares analytic gradients against central differences, perturbing params
// in place (restored afterwards). Error per parameter is
// |a - f| / max(1, |a|, |f|); the maximum is returned. h must lie in
// [1e-7, 1e-4].
GradCheckResult CheckGradient(std::span<double> params, std::span<const double> analytic,
                              const std::function<double()>& loss, double h,
                              const RegionFn& region = {});

// Scalar loss of a batched network output; writes dLoss/dOutput when
// output_grad is non-null.
using OutputLoss = std::function<double(const Matrix& output, Matrix* output_grad)>;

GradCheckResult GradCheck(Mlp& net, const OutputLoss& loss, const Matrix& input, double h);

// Sign pattern of every relu pre-activation in cache, appended to out.
void AppendReluRegion(const Mlp& net, const ForwardCache& cache, std::vector<std::int8_t>& out);

// 0.5 * ||output - target||^2 summed over the batch.
OutputLoss SquaredErrorLoss(Matrix target);

}  // namespace ccmarl::nn
