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

#include "ccmarl/common/random.hpp"
#include "ccmarl/nn/matrix.hpp"

namespace ccmarl::nn {

struct OuParams {
  double theta = 0.15;
  double sigma = 0.2;
  double mu = 0.0;
};

// Ornstein-Uhlenbeck exploration noise in unit-step form (dt folded into
// theta and sigma):  x <- x + theta * (mu - x) + sigma * xi.
class OuNoise {
 public:
  OuNoise() = default;
  OuNoise(std::size_t dim, OuParams params = {});

  // Advances the process and returns scale * x.
  Vector Sample(Rng& rng);

  void Reset();

  // Scale only ever decreases; a larger value is ignored.
  void DecayTo(double scale);

  double scale() const { return scale_; }
  const Vector& state() const { return x_; }
  Vector& mutable_state() { return x_; }
  const OuParams& params() const { return params_; }

 private:
  OuParams params_;
  Vector x_;
  double scale_ = 1.0;
};

// max(0, 1 - episode / decay_episodes); 0 when decay_episodes is 0.
double LinearDecayScale(std::size_t episode, std::size_t decay_episodes);

}  // namespace ccmarl::nn
