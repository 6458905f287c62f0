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

#include "ccmarl/dumie/estimators.hpp"

#include <algorithm>
#include <array>
#include <bit>
#include <cmath>
#include <numbers>
#include <stdexcept>

namespace ccmarl::dumie {
namespace {

using nn::Activation;
using nn::Matrix;
using nn::Vector;

const double kHalfLog2Pi = 0.5 * std::log(2.0 * std::numbers::pi);

Matrix StackRows(const Matrix& top, const Matrix& bottom) {
  if (top.cols() != bottom.cols()) throw std::invalid_argument("stack: column mismatch");
  Matrix out(top.rows() + bottom.rows(), top.cols());
  std::copy(top.values().begin(), top.values().end(), out.values().begin());
  std::copy(bottom.values().begin(), bottom.values().end(),
            out.values().begin() + static_cast<std::ptrdiff_t>(top.size()));
  return out;
}

Matrix RepeatRow(std::span<const double> row, std::size_t times) {
  Matrix out(times, row.size());
  for (std::size_t r = 0; r < times; ++r) std::copy(row.begin(), row.end(), out.row(r).begin());
  return out;
}

void AddInto(Vector& dst, const Vector& src) {
  for (std::size_t i = 0; i < dst.size(); ++i) dst[i] += src[i];
}

}  // namespace

std::uint64_t HashParameters(std::span<const double> params, std::uint64_t seed) {
  std::uint64_t h = seed;
  for (double v : params) {
    const auto bits = std::bit_cast<std::array<unsigned char, sizeof(double)>>(v);
    for (unsigned char b : bits) {
      h ^= b;
      h *= 1099511628211ULL;
    }
  }
  return h;
}

JsdNet::JsdNet(std::size_t msg_dim, std::size_t act_dim, Rng& rng, double lr) {
  const std::array<Activation, 1> relu{Activation::kRelu};
  const std::array<Activation, 2> head{Activation::kRelu, Activation::kIdentity};
  const std::array<std::size_t, 2> mdims{msg_dim, kEncoderWidth};
  const std::array<std::size_t, 2> adims{act_dim, kEncoderWidth};
  const std::array<std::size_t, 3> sdims{2 * kEncoderWidth, kScorerWidth, 1};
  message_encoder = nn::Mlp::Create(mdims, relu, rng);
  action_encoder = nn::Mlp::Create(adims, relu, rng);
  scorer = nn::Mlp::Create(sdims, head, rng);
  message_adam = nn::Adam(message_encoder.parameter_count(), {.lr = lr});
  action_adam = nn::Adam(action_encoder.parameter_count(), {.lr = lr});
  scorer_adam = nn::Adam(scorer.parameter_count(), {.lr = lr});
}

Vector JsdNet::Scores(const Matrix& messages, const Matrix& actions) const {
  const Matrix joint = nn::HConcat(message_encoder.Forward(messages), action_encoder.Forward(actions));
  const Matrix t = scorer.Forward(joint);
  return Vector(t.values().begin(), t.values().end());
}

double JsdNet::Score(std::span<const double> message, std::span<const double> action) const {
  return Scores(Matrix::RowVector(message), Matrix::RowVector(action)).front();
}

std::uint64_t JsdNet::ParameterHash() const {
  std::uint64_t h = HashParameters(message_encoder.parameters());
  h = HashParameters(action_encoder.parameters(), h);
  return HashParameters(scorer.parameters(), h);
}

ClubNet::ClubNet(std::size_t msg_dim, std::size_t act_dim, Rng& rng, double lr) {
  const std::array<std::size_t, 3> dims{msg_dim, kHiddenWidth, act_dim};
  const std::array<Activation, 2> acts{Activation::kRelu, Activation::kTanh};
  mean = nn::Mlp::Create(dims, acts, rng);
  adam = nn::Adam(mean.parameter_count(), {.lr = lr});
}

Vector ClubNet::Mean(std::span<const double> message) const { return mean.Forward(message); }

std::uint64_t ClubNet::ParameterHash() const { return HashParameters(mean.parameters()); }

double GaussianLogLikelihood(std::span<const double> a, std::span<const double> mu) {
  double sq = 0.0;
  for (std::size_t d = 0; d < a.size(); ++d) {
    const double r = a[d] - mu[d];
    sq += r * r;
  }
  return -0.5 * sq - static_cast<double>(a.size()) * kHalfLog2Pi;
}

double JsdLoss(const JsdNet& net, const Matrix& messages, const Matrix& actions,
               const Matrix& marginal_actions, JsdGradients* grads) {
  const std::size_t batch = messages.rows();
  if (batch == 0 || actions.rows() != batch || marginal_actions.rows() != batch) {
    throw std::invalid_argument("jsd_loss: joint and marginal batches must be nonempty and equal-sized");
  }
  // Rows [0, B) are joint pairs, rows [B, 2B) pair m_t with a_k.
  const Matrix all_messages = StackRows(messages, messages);
  const Matrix all_actions = StackRows(actions, marginal_actions);
  nn::ForwardCache mc, ac, sc;
  const Matrix em = net.message_encoder.Forward(all_messages, &mc);
  const Matrix ea = net.action_encoder.Forward(all_actions, &ac);
  const Matrix scores = net.scorer.Forward(nn::HConcat(em, ea), &sc);

  const double inv_b = 1.0 / static_cast<double>(batch);
  double joint_term = 0.0;
  double marginal_term = 0.0;
  Matrix score_grad(2 * batch, 1);
  for (std::size_t r = 0; r < batch; ++r) {
    const double tj = scores(r, 0);
    const double tm = scores(batch + r, 0);
    joint_term += nn::Softplus(-tj);
    marginal_term += nn::Softplus(tm);
    score_grad(r, 0) = -nn::Sigmoid(-tj) * inv_b;
    score_grad(batch + r, 0) = nn::Sigmoid(tm) * inv_b;
  }
  const double loss = (joint_term + marginal_term) * inv_b;
  if (grads == nullptr) return loss;

  grads->message_encoder.assign(net.message_encoder.parameter_count(), 0.0);
  grads->action_encoder.assign(net.action_encoder.parameter_count(), 0.0);
  grads->scorer.assign(net.scorer.parameter_count(), 0.0);
  const Matrix concat_grad = net.scorer.Backward(sc, score_grad, grads->scorer);
  const std::size_t width = em.cols();
  net.message_encoder.Backward(mc, nn::ColumnSlice(concat_grad, 0, width), grads->message_encoder);
  net.action_encoder.Backward(ac, nn::ColumnSlice(concat_grad, width, ea.cols()),
                              grads->action_encoder);
  return loss;
}

double JsdEstimate(const JsdNet& net, std::span<const double> message,
                   std::span<const double> action, const Matrix& marginal_actions) {
  const std::size_t k = marginal_actions.rows();
  if (k == 0) return 0.0;
  const Vector em = net.message_encoder.Forward(message);
  Matrix actions(k + 1, action.size());
  std::copy(action.begin(), action.end(), actions.row(0).begin());
  std::copy(marginal_actions.values().begin(), marginal_actions.values().end(),
            actions.values().begin() + static_cast<std::ptrdiff_t>(action.size()));
  const Matrix ea = net.action_encoder.Forward(actions);
  const Matrix scores = net.scorer.Forward(nn::HConcat(RepeatRow(em, k + 1), ea));
  double marginal = 0.0;
  for (std::size_t r = 1; r <= k; ++r) marginal += nn::Softplus(scores(r, 0));
  return -nn::Softplus(-scores(0, 0)) - marginal / static_cast<double>(k);
}

double ClubLoss(const ClubNet& net, const Matrix& messages, const Matrix& actions, Vector* grads) {
  const std::size_t batch = messages.rows();
  if (batch == 0 || actions.rows() != batch) {
    throw std::invalid_argument("club_loss: batch must be nonempty and paired");
  }
  nn::ForwardCache cache;
  const Matrix mu = net.mean.Forward(messages, &cache);
  if (mu.cols() != actions.cols()) throw std::invalid_argument("club_loss: action dim mismatch");
  const double inv_b = 1.0 / static_cast<double>(batch);
  double total = 0.0;
  Matrix mu_grad(batch, mu.cols());
  for (std::size_t r = 0; r < batch; ++r) {
    total -= GaussianLogLikelihood(actions.row(r), mu.row(r));
    for (std::size_t d = 0; d < mu.cols(); ++d) mu_grad(r, d) = (mu(r, d) - actions(r, d)) * inv_b;
  }
  if (grads != nullptr) {
    grads->assign(net.mean.parameter_count(), 0.0);
    net.mean.Backward(cache, mu_grad, *grads);
  }
  return total * inv_b;
}

double ClubEstimate(const ClubNet& net, std::span<const double> message,
                    std::span<const double> action, const Matrix& marginal_actions) {
  const std::size_t k = marginal_actions.rows();
  if (k == 0) return 0.0;
  const Vector mu = net.Mean(message);
  double marginal = 0.0;
  for (std::size_t r = 0; r < k; ++r) marginal += GaussianLogLikelihood(marginal_actions.row(r), mu);
  return GaussianLogLikelihood(action, mu) - marginal / static_cast<double>(k);
}

CcLossResult CcLossStep(JsdNet& jsd, ClubNet& club, const PairBuffers& buffers,
                        std::size_t batch_size, Rng& rng) {
  CcLossResult result;
  JsdGradients jsd_total{Vector(jsd.message_encoder.parameter_count(), 0.0),
                         Vector(jsd.action_encoder.parameter_count(), 0.0),
                         Vector(jsd.scorer.parameter_count(), 0.0)};
  Vector club_total(club.mean.parameter_count(), 0.0);
  const std::size_t n = buffers.n_agents();
  for (std::size_t i = 0; i < n; ++i) {
    for (std::size_t j = 0; j < n; ++j) {
      if (j == i) continue;
      ++result.pairs_visited;
      const MessageBuffer& buf = buffers.at(j, i);
      if (!buf.lossless().empty()) {
        const PairBatch joint = SampleJoint(buf.lossless(), batch_size, rng);
        const Matrix marginal = SampleMarginalActions(buf.lossless(), joint.messages.rows(), rng);
        JsdGradients g;
        result.jsd_loss += JsdLoss(jsd, joint.messages, joint.actions, marginal, &g);
        AddInto(jsd_total.message_encoder, g.message_encoder);
        AddInto(jsd_total.action_encoder, g.action_encoder);
        AddInto(jsd_total.scorer, g.scorer);
        ++result.jsd_pairs;
      }
      if (!buf.lossy().empty()) {
        const PairBatch joint = SampleJoint(buf.lossy(), batch_size, rng);
        Vector g;
        result.club_loss += ClubLoss(club, joint.messages, joint.actions, &g);
        AddInto(club_total, g);
        ++result.club_pairs;
      }
    }
  }
  if (result.jsd_pairs > 0) {
    jsd.message_adam.Step(jsd.message_encoder.mutable_parameters(), jsd_total.message_encoder);
    jsd.action_adam.Step(jsd.action_encoder.mutable_parameters(), jsd_total.action_encoder);
    jsd.scorer_adam.Step(jsd.scorer.mutable_parameters(), jsd_total.scorer);
  }
  if (result.club_pairs > 0) club.adam.Step(club.mean.mutable_parameters(), club_total);
  return result;
}

double CombineShaping(double reward, const channel::LinkStatus& links, std::span<const double> jsd,
                      std::span<const double> club, const ShapingCoefficients& coeffs,
                      bool normalize_pairs) {
  const std::size_t n = links.size();
  if (jsd.size() != n * n || club.size() != n * n) {
    throw std::invalid_argument("shape_reward: estimate tables must be N x N");
  }
  if (coeffs.alpha == 0.0 && coeffs.beta == 0.0) return reward;
  double bonus = 0.0;
  for (std::size_t i = 0; i < n; ++i) {
    for (std::size_t j = 0; j < n; ++j) {
      if (j == i) continue;
      const std::size_t idx = j * n + i;
      if (links.Delivered(j, i)) {
        bonus += coeffs.alpha * jsd[idx];
      } else {
        bonus -= coeffs.beta * club[idx];
      }
    }
  }
  if (normalize_pairs && n > 1) bonus /= static_cast<double>(n * (n - 1));
  return reward + bonus;
}

DuMie::DuMie(std::size_t n_agents, const DuMieConfig& config, Rng& init_rng)
    : config_(config),
      jsd_(config.msg_dim, config.act_dim, init_rng, config.lr),
      club_(config.msg_dim, config.act_dim, init_rng, config.lr),
      buffers_(n_agents, config.buffer_capacity) {
  if (config.coeffs.alpha < 0.0 || config.coeffs.beta < 0.0) {
    throw std::invalid_argument("dumie: shaping coefficients must be non-negative");
  }
}

void DuMie::Record(const Matrix& sent, const Matrix& actions, const channel::LinkStatus& links) {
  if (!active()) return;
  const std::size_t n = buffers_.n_agents();
  for (std::size_t i = 0; i < n; ++i) {
    const Vector action(actions.row(i).begin(), actions.row(i).end());
    for (std::size_t j = 0; j < n; ++j) {
      if (j == i) continue;
      const Vector message(sent.row(j).begin(), sent.row(j).end());
      buffers_.at(j, i).Push(message, action, links.Delivered(j, i) ? 1 : 0);
    }
  }
}

double DuMie::Shape(double reward, const Matrix& sent, const Matrix& actions,
                    const channel::LinkStatus& links, Rng& rng) const {
  if (!active()) return reward;
  const std::size_t n = buffers_.n_agents();
  Vector jsd(n * n, 0.0);
  Vector club(n * n, 0.0);
  for (std::size_t i = 0; i < n; ++i) {
    for (std::size_t j = 0; j < n; ++j) {
      if (j == i) continue;
      const MessageBuffer& buf = buffers_.at(j, i);
      if (links.Delivered(j, i)) {
        if (config_.coeffs.alpha == 0.0) continue;
        const Matrix marginal = SampleEstimatorActions(buf.lossless(), config_.mi_batch, rng);
        jsd[j * n + i] = JsdEstimate(jsd_, sent.row(j), actions.row(i), marginal);
      } else {
        if (config_.coeffs.beta == 0.0) continue;
        const Matrix marginal = SampleEstimatorActions(buf.lossy(), config_.mi_batch, rng);
        club[j * n + i] = ClubEstimate(club_, sent.row(j), actions.row(i), marginal);
      }
    }
  }
  return CombineShaping(reward, links, jsd, club, config_.coeffs, config_.normalize_pairs);
}

CcLossResult DuMie::Update(Rng& rng) {
  if (!active()) return {};
  return CcLossStep(jsd_, club_, buffers_, config_.update_batch, rng);
}

}  // namespace ccmarl::dumie
