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

#include "ccmarl/nn/grad_check.hpp"

#include <algorithm>
#include <cmath>
#include <stdexcept>

namespace ccmarl::nn {

GradCheckResult CheckGradient(std::span<double> params, std::span<const double> analytic,
                              const std::function<double()>& loss, double h,
                              const RegionFn& region) {
  if (!(h >= 1e-7 && h <= 1e-4)) throw std::invalid_argument("grad_check: h outside [1e-7, 1e-4]");
  if (params.size() != analytic.size()) {
    throw std::invalid_argument("grad_check: analytic gradient has wrong size");
  }
  GradCheckResult result;
  const std::vector<std::int8_t> base_region = region ? region() : std::vector<std::int8_t>{};
  for (std::size_t i = 0; i < params.size(); ++i) {
    const double saved = params[i];
    params[i] = saved + h;
    const double plus = loss();
    const bool plus_same = !region || region() == base_region;
    params[i] = saved - h;
    const double minus = loss();
    const bool minus_same = !region || region() == base_region;
    params[i] = saved;
    if (!plus_same || !minus_same) {
      ++result.excluded;
      continue;
    }
    const double numeric = (plus - minus) / (2.0 * h);
    const double a = analytic[i];
    const double denom = std::max({1.0, std::abs(a), std::abs(numeric)});
    result.max_relative_error = std::max(result.max_relative_error, std::abs(a - numeric) / denom);
    ++result.compared;
  }
  return result;
}

void AppendReluRegion(const Mlp& net, const ForwardCache& cache, std::vector<std::int8_t>& out) {
  for (std::size_t l = 0; l < net.num_layers(); ++l) {
    if (net.layer(l).activation != Activation::kRelu) continue;
    for (double v : cache.pre[l].values()) {
      out.push_back(static_cast<std::int8_t>(v > 0.0 ? 1 : (v < 0.0 ? -1 : 0)));
    }
  }
}

GradCheckResult GradCheck(Mlp& net, const OutputLoss& loss, const Matrix& input, double h) {
  ForwardCache cache;
  const Matrix out = net.Forward(input, &cache);
  Matrix out_grad(out.rows(), out.cols());
  loss(out, &out_grad);
  Vector analytic(net.parameter_count(), 0.0);
  net.Backward(cache, out_grad, analytic);

  auto params = net.mutable_parameters();
  auto eval = [&] { return loss(net.Forward(input), nullptr); };
  auto region = [&] {
    ForwardCache c;
    net.Forward(input, &c);
    std::vector<std::int8_t> signs;
    AppendReluRegion(net, c, signs);
    return signs;
  };
  return CheckGradient(params, analytic, eval, h, region);
}

OutputLoss SquaredErrorLoss(Matrix target) {
  return [target = std::move(target)](const Matrix& out, Matrix* grad) {
    if (out.rows() != target.rows() || out.cols() != target.cols()) {
      throw std::invalid_argument("squared error: shape mismatch");
    }
    double total = 0.0;
    for (std::size_t i = 0; i < out.size(); ++i) {
      const double d = out.data()[i] - target.data()[i];
      total += 0.5 * d * d;
      if (grad != nullptr) grad->data()[i] = d;
    }
    return total;
  };
}

}  // namespace ccmarl::nn
