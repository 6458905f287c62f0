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

#include "ccmarl/channel/channel.hpp"
#include "ccmarl/common/random.hpp"
#include "ccmarl/dumie/message_buffer.hpp"
#include "ccmarl/nn/adam.hpp"
#include "ccmarl/nn/matrix.hpp"
#include "ccmarl/nn/mlp.hpp"

namespace ccmarl::dumie {

// Discriminator T(m, a) for the Jensen-Shannon lower bound: separate
// single-layer relu encoders for message and action, concatenated and scored
// by a small relu head.
class JsdNet {
 public:
  static constexpr std::size_t kEncoderWidth = 32;
  static constexpr std::size_t kScorerWidth = 32;

  JsdNet(std::size_t msg_dim, std::size_t act_dim, Rng& rng, double lr = 1e-4);

  // T for each row pair (messages.row(r), actions.row(r)).
  nn::Vector Scores(const nn::Matrix& messages, const nn::Matrix& actions) const;
  double Score(std::span<const double> message, std::span<const double> action) const;

  nn::Mlp message_encoder;
  nn::Mlp action_encoder;
  nn::Mlp scorer;
  nn::Adam message_adam;
  nn::Adam action_adam;
  nn::Adam scorer_adam;

  std::uint64_t ParameterHash() const;
};

struct JsdGradients {
  nn::Vector message_encoder;
  nn::Vector action_encoder;
  nn::Vector scorer;
};

// Variational conditional q(a | m) = N(a; mu(m), I) with mu a tanh-bounded
// network, for the contrastive log-ratio upper bound.
class ClubNet {
 public:
  static constexpr std::size_t kHiddenWidth = 32;

  ClubNet(std::size_t msg_dim, std::size_t act_dim, Rng& rng, double lr = 1e-4);

  nn::Vector Mean(std::span<const double> message) const;

  nn::Mlp mean;
  nn::Adam adam;

  std::uint64_t ParameterHash() const;
};

// log N(a; mu, I)
double GaussianLogLikelihood(std::span<const double> a, std::span<const double> mu);

// Discriminator loss: mean sp(-T(m_t, a_t)) + mean sp(T(m_t, a_k)), where row
// t of marginal_actions supplies a_k. Gradients are written when grads is
// non-null (overwritten, not accumulated).
double JsdLoss(const JsdNet& net, const nn::Matrix& messages, const nn::Matrix& actions,
               const nn::Matrix& marginal_actions, JsdGradients* grads);

// Pointwise lower-bound estimate for one (m, a) against an empirical
// marginal: -sp(-T(m, a)) - mean_k sp(T(m, a_k)). Zero when the marginal
// batch is empty.
double JsdEstimate(const JsdNet& net, std::span<const double> message,
                   std::span<const double> action, const nn::Matrix& marginal_actions);

// Negative mean conditional log-likelihood over the batch.
double ClubLoss(const ClubNet& net, const nn::Matrix& messages, const nn::Matrix& actions,
                nn::Vector* grads);

// log q(a | m) - mean_k log q(a_k | m). Zero when the marginal batch is empty.
double ClubEstimate(const ClubNet& net, std::span<const double> message,
                    std::span<const double> action, const nn::Matrix& marginal_actions);

struct CcLossResult {
  double jsd_loss = 0.0;   // summed over pairs with lossless samples
  double club_loss = 0.0;  // summed over pairs with lossy samples
  std::size_t pairs_visited = 0;
  std::size_t jsd_pairs = 0;
  std::size_t club_pairs = 0;

  double total() const { return jsd_loss + club_loss; }
};

// One joint estimator update over every ordered pair: each pair's lossless
// pool trains the JSD net, its lossy pool trains the CLUB net. Gradients are
// summed across pairs, then each net takes one Adam step if any pair fed it.
CcLossResult CcLossStep(JsdNet& jsd, ClubNet& club, const PairBuffers& buffers,
                        std::size_t batch_size, Rng& rng);

struct ShapingCoefficients {
  double alpha = 0.0;  // weight on the lossless (JSD) term
  double beta = 0.0;   // weight on the lossy (CLUB) term
};

// r + sum_i sum_{j != i} [alpha * iota^{ji} * jsd(j,i) - beta * (1 - iota^{ji}) * club(j,i)].
// jsd and club are N x N, indexed [sender * N + receiver]. With
// normalize_pairs the sum is divided by N(N-1).
double CombineShaping(double reward, const channel::LinkStatus& links,
                      std::span<const double> jsd, std::span<const double> club,
                      const ShapingCoefficients& coeffs, bool normalize_pairs = false);

struct DuMieConfig {
  std::size_t msg_dim = 8;
  std::size_t act_dim = 2;
  std::size_t buffer_capacity = 1000;
  std::size_t update_batch = 256;
  std::size_t mi_batch = 32;
  std::size_t update_every = 100;
  double lr = 1e-4;
  ShapingCoefficients coeffs;
  bool normalize_pairs = false;
};

// Estimators, per-pair buffers and the reward shaper for one training run.
class DuMie {
 public:
  DuMie(std::size_t n_agents, const DuMieConfig& config, Rng& init_rng);

  // Inactive when both coefficients are zero: nothing is recorded or trained.
  bool active() const { return config_.coeffs.alpha > 0.0 || config_.coeffs.beta > 0.0; }

  // Records (m^{j}, a^{i}, iota^{ji}) for every ordered pair.
  void Record(const nn::Matrix& sent, const nn::Matrix& actions, const channel::LinkStatus& links);

  // Shaped reward for one step. Terms whose coefficient is zero are not
  // evaluated.
  double Shape(double reward, const nn::Matrix& sent, const nn::Matrix& actions,
               const channel::LinkStatus& links, Rng& rng) const;

  CcLossResult Update(Rng& rng);

  const JsdNet& jsd() const { return jsd_; }
  const ClubNet& club() const { return club_; }
  JsdNet& mutable_jsd() { return jsd_; }
  ClubNet& mutable_club() { return club_; }
  const PairBuffers& buffers() const { return buffers_; }
  const DuMieConfig& config() const { return config_; }

 private:
  DuMieConfig config_;
  JsdNet jsd_;
  ClubNet club_;
  PairBuffers buffers_;
};

std::uint64_t HashParameters(std::span<const double> params, std::uint64_t seed = 1469598103934665603ULL);

}  // namespace ccmarl::dumie
