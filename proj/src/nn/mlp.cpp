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

#include "ccmarl/nn/mlp.hpp"

#include <algorithm>
#include <atomic>
#include <cmath>
#include <stdexcept>
#include <string>

#include "ccmarl/simd/kernels.hpp"

namespace ccmarl::nn {
namespace {

std::atomic<std::uint64_t> g_next_stamp{1};

std::string LayerError(std::size_t l, const std::string& what) {
  return "mlp layer " + std::to_string(l) + ": " + what;
}

}  // namespace

std::string_view ActivationName(Activation a) {
  switch (a) {
    case Activation::kRelu:
      return "relu";
    case Activation::kTanh:
      return "tanh";
    case Activation::kIdentity:
      return "identity";
  }
  return "identity";
}

Activation ParseActivation(std::string_view name) {
  if (name == "relu") return Activation::kRelu;
  if (name == "tanh") return Activation::kTanh;
  if (name == "identity") return Activation::kIdentity;
  throw std::invalid_argument("unknown activation '" + std::string(name) + "'");
}

Mlp::Mlp(std::vector<LayerSpec> layers) : layers_(std::move(layers)) {
  std::size_t total = 0;
  for (std::size_t l = 0; l < layers_.size(); ++l) {
    const LayerSpec& spec = layers_[l];
    if (spec.in == 0 || spec.out == 0) throw std::invalid_argument(LayerError(l, "zero width"));
    if (l > 0 && spec.in != layers_[l - 1].out) {
      throw std::invalid_argument(LayerError(
          l, "input dim " + std::to_string(spec.in) + " does not match previous output " +
                 std::to_string(layers_[l - 1].out)));
    }
    offsets_.push_back(total);
    total += spec.in * spec.out + spec.out;
  }
  params_.assign(total, 0.0);
  Touch();
}

Mlp Mlp::Create(std::span<const std::size_t> dims, std::span<const Activation> activations,
                Rng& rng) {
  if (dims.size() < 2 || activations.size() != dims.size() - 1) {
    throw std::invalid_argument("mlp: need one activation per layer");
  }
  std::vector<LayerSpec> layers;
  for (std::size_t l = 0; l + 1 < dims.size(); ++l) {
    layers.push_back({dims[l], dims[l + 1], activations[l]});
  }
  Mlp net(std::move(layers));
  for (std::size_t l = 0; l < net.num_layers(); ++l) {
    const double bound = 1.0 / std::sqrt(static_cast<double>(net.layers_[l].in));
    for (double& w : net.mutable_weights(l)) w = UniformReal(rng, -bound, bound);
  }
  return net;
}

void Mlp::Touch() { stamp_ = g_next_stamp.fetch_add(1, std::memory_order_relaxed); }

std::span<double> Mlp::mutable_parameters() {
  Touch();
  return params_;
}

std::span<const double> Mlp::weights(std::size_t l) const {
  return std::span<const double>(params_).subspan(WeightOffset(l),
                                                  layers_[l].in * layers_[l].out);
}

std::span<double> Mlp::mutable_weights(std::size_t l) {
  Touch();
  return std::span<double>(params_).subspan(WeightOffset(l), layers_[l].in * layers_[l].out);
}

std::span<const double> Mlp::bias(std::size_t l) const {
  return std::span<const double>(params_).subspan(BiasOffset(l), layers_[l].out);
}

std::span<double> Mlp::mutable_bias(std::size_t l) {
  Touch();
  return std::span<double>(params_).subspan(BiasOffset(l), layers_[l].out);
}

Matrix Mlp::Forward(const Matrix& input, ForwardCache* cache) const {
  if (layers_.empty()) throw std::logic_error("mlp: forward on empty network");
  if (cache != nullptr) {
    cache->inputs.clear();
    cache->pre.clear();
    cache->post.clear();
    cache->stamp = stamp_;
  }
  const std::size_t batch = input.rows();
  Matrix current = input;
  for (std::size_t l = 0; l < layers_.size(); ++l) {
    const LayerSpec& spec = layers_[l];
    if (current.cols() != spec.in) {
      throw std::invalid_argument(LayerError(
          l, "expected input dim " + std::to_string(spec.in) + ", got " +
                 std::to_string(current.cols())));
    }
    Matrix pre(batch, spec.out);
    const auto b = bias(l);
    for (std::size_t r = 0; r < batch; ++r) std::copy(b.begin(), b.end(), pre.row(r).begin());
    if (batch > 0) {
      simd::Kernels().gemm_nt(current.data(), params_.data() + WeightOffset(l), pre.data(),
                              batch, spec.out, spec.in);
    }
    Matrix post = pre;
    switch (spec.activation) {
      case Activation::kRelu:
        for (double& v : post.values()) v = v > 0.0 ? v : 0.0;
        break;
      case Activation::kTanh:
        for (double& v : post.values()) v = std::tanh(v);
        break;
      case Activation::kIdentity:
        break;
    }
    if (cache != nullptr) {
      cache->inputs.push_back(std::move(current));
      cache->pre.push_back(std::move(pre));
      cache->post.push_back(post);
    }
    current = std::move(post);
  }
  return current;
}

Vector Mlp::Forward(std::span<const double> input) const {
  const Matrix out = Forward(Matrix::RowVector(input));
  return Vector(out.values().begin(), out.values().end());
}

Matrix Mlp::Backward(const ForwardCache& cache, const Matrix& output_grad,
                     std::span<double> param_grad) const {
  if (cache.stamp != stamp_ || cache.pre.size() != layers_.size()) {
    throw std::logic_error("mlp: backward with a stale or foreign forward cache");
  }
  if (param_grad.size() != params_.size()) {
    throw std::invalid_argument("mlp: parameter gradient has wrong size");
  }
  const std::size_t batch = cache.inputs.front().rows();
  if (output_grad.rows() != batch || output_grad.cols() != output_dim()) {
    throw std::invalid_argument("mlp: output gradient shape does not match cache");
  }
  const auto& kernels = simd::Kernels();
  Matrix delta = output_grad;
  for (std::size_t l = layers_.size(); l-- > 0;) {
    const LayerSpec& spec = layers_[l];
    const Matrix& pre = cache.pre[l];
    const Matrix& post = cache.post[l];
    switch (spec.activation) {
      case Activation::kRelu:
        // Subgradient 0 at exactly 0.
        for (std::size_t i = 0; i < delta.size(); ++i) {
          if (!(pre.data()[i] > 0.0)) delta.data()[i] = 0.0;
        }
        break;
      case Activation::kTanh:
        for (std::size_t i = 0; i < delta.size(); ++i) {
          const double y = post.data()[i];
          delta.data()[i] *= 1.0 - y * y;
        }
        break;
      case Activation::kIdentity:
        break;
    }
    const Matrix& input = cache.inputs[l];
    // dW (out x in) += delta^T (out x B) * input (B x in)
    const Matrix delta_t = delta.Transposed();
    const Matrix input_t = input.Transposed();
    double* w_grad = param_grad.data() + WeightOffset(l);
    if (batch > 0) kernels.gemm_nt(delta_t.data(), input_t.data(), w_grad, spec.out, spec.in, batch);
    double* b_grad = param_grad.data() + BiasOffset(l);
    for (std::size_t r = 0; r < batch; ++r) {
      const auto d = delta.row(r);
      for (std::size_t o = 0; o < spec.out; ++o) b_grad[o] += d[o];
    }
    // dX (B x in) = delta (B x out) * W (out x in)
    Matrix weight_t(spec.in, spec.out);
    const auto w = weights(l);
    for (std::size_t o = 0; o < spec.out; ++o) {
      for (std::size_t i = 0; i < spec.in; ++i) weight_t(i, o) = w[o * spec.in + i];
    }
    Matrix input_grad(batch, spec.in);
    if (batch > 0) kernels.gemm_nt(delta.data(), weight_t.data(), input_grad.data(), batch, spec.in, spec.out);
    delta = std::move(input_grad);
  }
  return delta;
}

void SoftUpdate(Mlp& target, const Mlp& main, double tau) {
  if (!target.SameArchitecture(main)) {
    throw std::invalid_argument("soft_update: architecture mismatch");
  }
  if (!(tau >= 0.0 && tau <= 1.0)) throw std::invalid_argument("soft_update: tau outside [0,1]");
  if (tau == 0.0) return;
  const auto src = main.parameters();
  auto dst = target.mutable_parameters();
  if (tau == 1.0) {
    std::copy(src.begin(), src.end(), dst.begin());
    return;
  }
  simd::Kernels().lerp(tau, src.data(), dst.data(), dst.size());
}

double Softplus(double z) {
  if (z > 0.0) return z + std::log1p(std::exp(-z));
  return std::log1p(std::exp(z));
}

double Sigmoid(double z) {
  if (z >= 0.0) return 1.0 / (1.0 + std::exp(-z));
  const double e = std::exp(z);
  return e / (1.0 + e);
}

}  // namespace ccmarl::nn
