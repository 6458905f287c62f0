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
#include <span>
#include <string_view>
#include <vector>

#include "ccmarl/common/random.hpp"
#include "ccmarl/nn/matrix.hpp"

namespace ccmarl::nn {

enum class Activation { kRelu, kTanh, kIdentity };

std::string_view ActivationName(Activation a);
Activation ParseActivation(std::string_view name);

struct LayerSpec {
  std::size_t in = 0;
  std::size_t out = 0;
  Activation activation = Activation::kIdentity;

  bool operator==(const LayerSpec&) const = default;
};

// Per-layer activations recorded by a forward pass, consumed by Backward.
struct ForwardCache {
  std::vector<Matrix> inputs;  // inputs[l] feeds layer l
  std::vector<Matrix> pre;     // affine output of layer l
  std::vector<Matrix> post;    // activation of pre[l]
  std::uint64_t stamp = 0;     // parameter version the cache was built against
};

// Feed-forward stack of affine + activation layers. Parameters live in one
// flat buffer: for each layer, the (out x in) row-major weight block followed
// by the bias. Optimizers and target updates operate on that buffer directly.
class Mlp {
 public:
  Mlp() = default;

  // Zero-initialized parameters. Consecutive layer dims must chain.
  explicit Mlp(std::vector<LayerSpec> layers);

  // dims = {input, hidden..., output}; one activation per layer. Weights are
  // uniform in [-1/sqrt(fan_in), 1/sqrt(fan_in)], biases zero.
  static Mlp Create(std::span<const std::size_t> dims,
                    std::span<const Activation> activations, Rng& rng);

  std::size_t input_dim() const { return layers_.empty() ? 0 : layers_.front().in; }
  std::size_t output_dim() const { return layers_.empty() ? 0 : layers_.back().out; }
  std::size_t num_layers() const { return layers_.size(); }
  std::size_t parameter_count() const { return params_.size(); }
  const LayerSpec& layer(std::size_t l) const { return layers_[l]; }
  const std::vector<LayerSpec>& layers() const { return layers_; }

  std::span<const double> parameters() const { return params_; }
  // Any mutable access invalidates outstanding forward caches.
  std::span<double> mutable_parameters();

  std::span<const double> weights(std::size_t l) const;
  std::span<double> mutable_weights(std::size_t l);
  std::span<const double> bias(std::size_t l) const;
  std::span<double> mutable_bias(std::size_t l);

  // Batched forward: one sample per row. Fills cache when given.
  Matrix Forward(const Matrix& input, ForwardCache* cache = nullptr) const;
  Vector Forward(std::span<const double> input) const;

  // Reverse pass for the objective whose gradient w.r.t. the output batch is
  // output_grad. Parameter gradients are accumulated (+=) into param_grad,
  // which must have parameter_count() entries. Returns the input gradient.
  Matrix Backward(const ForwardCache& cache, const Matrix& output_grad,
                  std::span<double> param_grad) const;

  bool SameArchitecture(const Mlp& other) const { return layers_ == other.layers_; }

  std::uint64_t stamp() const { return stamp_; }

 private:
  std::size_t WeightOffset(std::size_t l) const { return offsets_[l]; }
  std::size_t BiasOffset(std::size_t l) const {
    return offsets_[l] + layers_[l].in * layers_[l].out;
  }
  void Touch();

  std::vector<LayerSpec> layers_;
  std::vector<std::size_t> offsets_;
  Vector params_;
  std::uint64_t stamp_ = 0;
};

// target <- (1 - tau) * target + tau * main, elementwise.
void SoftUpdate(Mlp& target, const Mlp& main, double tau);

// log(1 + e^z) without overflow for large z or underflow-to-NaN for small z.
double Softplus(double z);

// d/dz softplus(z).
double Sigmoid(double z);

}  // namespace ccmarl::nn
