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

#include "ccmarl/nn/ou_noise.hpp"

#include <algorithm>

namespace ccmarl::nn {

OuNoise::OuNoise(std::size_t dim, OuParams params)
    : params_(params), x_(dim, params.mu) {}

Vector OuNoise::Sample(Rng& rng) {
  Vector out(x_.size());
  for (std::size_t i = 0; i < x_.size(); ++i) {
    x_[i] += params_.theta * (params_.mu - x_[i]) + params_.sigma * StandardNormal(rng);
    out[i] = scale_ * x_[i];
  }
  return out;
}

void OuNoise::Reset() { std::fill(x_.begin(), x_.end(), params_.mu); }

void OuNoise::DecayTo(double scale) {
  scale_ = std::clamp(std::min(scale, scale_), 0.0, 1.0);
}

double LinearDecayScale(std::size_t episode, std::size_t decay_episodes) {
  if (decay_episodes == 0) return 0.0;
  const double frac = static_cast<double>(episode) / static_cast<double>(decay_episodes);
  return std::max(0.0, 1.0 - frac);
}

}  // namespace ccmarl::nn
