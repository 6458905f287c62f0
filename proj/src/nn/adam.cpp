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

#include "ccmarl/nn/adam.hpp"

#include <cmath>
#include <stdexcept>

#include "ccmarl/simd/kernels.hpp"

namespace ccmarl::nn {

Adam::Adam(std::size_t parameter_count, AdamConfig config)
    : config_(config), m_(parameter_count, 0.0), v_(parameter_count, 0.0) {
  if (!(config.lr > 0.0)) throw std::invalid_argument("adam: learning rate must be positive");
}

void Adam::Step(std::span<double> params, std::span<const double> grads) {
  if (params.size() != m_.size() || grads.size() != m_.size()) {
    throw std::invalid_argument("adam: parameter/gradient shape mismatch");
  }
  if (!AllFinite(grads)) throw std::domain_error("adam: non-finite gradient");
  ++t_;
  const double t = static_cast<double>(t_);
  const simd::AdamCoefficients coeffs{config_.lr,
                                      config_.beta1,
                                      config_.beta2,
                                      config_.eps,
                                      1.0 - std::pow(config_.beta1, t),
                                      1.0 - std::pow(config_.beta2, t)};
  simd::Kernels().adam(coeffs, params.data(), grads.data(), m_.data(), v_.data(),
                       params.size());
}

}  // namespace ccmarl::nn
