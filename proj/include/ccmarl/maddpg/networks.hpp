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
#include <filesystem>
#include <span>
#include <vector>

#include "ccmarl/common/random.hpp"
#include "ccmarl/nn/adam.hpp"
#include "ccmarl/nn/matrix.hpp"
#include "ccmarl/nn/mlp.hpp"
#include "ccmarl/nn/ou_noise.hpp"

namespace ccmarl::maddpg {

struct ActOutput {
  nn::Vector action;   // in [-1, 1]
  nn::Vector message;  // broadcast to every other agent
};

// Decentralized policy pi(a, m | o, M). Input is [own observation | received
// messages]; a relu trunk feeds one tanh output layer whose first act_dim
// units are the action and the remaining msg_dim units the outgoing message.
class ActorNet {
 public:
  ActorNet() = default;
  ActorNet(std::size_t obs_dim, std::size_t received_dim, std::size_t act_dim,
           std::size_t msg_dim, std::size_t hidden, double lr, Rng& rng);

  std::size_t obs_dim() const { return obs_dim_; }
  std::size_t received_dim() const { return received_dim_; }
  std::size_t act_dim() const { return act_dim_; }
  std::size_t msg_dim() const { return msg_dim_; }
  std::size_t output_dim() const { return act_dim_ + msg_dim_; }

  nn::Mlp net;
  nn::Mlp target;
  nn::Adam adam;

 private:
  std::size_t obs_dim_ = 0;
  std::size_t received_dim_ = 0;
  std::size_t act_dim_ = 0;
  std::size_t msg_dim_ = 0;
};

// Forward on [o | M]. With noise, the action gets the OU sample added and is
// clamped to [-1, 1]; the message is never perturbed.
ActOutput Act(const ActorNet& actor, std::span<const double> observation,
              std::span<const double> received, nn::OuNoise* noise = nullptr,
              Rng* rng = nullptr);

// Centralized Q(s, a_1, m_1, ..., a_N, m_N), shared by every agent. Input is
// [global state | per-agent (action, message) blocks].
class CriticNet {
 public:
  CriticNet() = default;
  CriticNet(std::size_t state_dim, std::size_t n_agents, std::size_t act_dim,
            std::size_t msg_dim, std::size_t hidden, double lr, Rng& rng);

  std::size_t state_dim() const { return state_dim_; }
  std::size_t block_dim() const { return block_dim_; }
  std::size_t input_dim() const { return state_dim_ + n_agents_ * block_dim_; }
  std::size_t BlockOffset(std::size_t agent) const { return state_dim_ + agent * block_dim_; }

  nn::Mlp net;
  nn::Mlp target;
  nn::Adam adam;

 private:
  std::size_t state_dim_ = 0;
  std::size_t n_agents_ = 0;
  std::size_t block_dim_ = 0;
};

// actor_<i>.txt and critic.txt in dir (main networks only).
void SaveNetworks(const std::vector<ActorNet>& actors, const CriticNet& critic,
                  const std::filesystem::path& dir);

// Replaces the main and target parameters of actors with the saved ones.
void LoadActors(std::vector<ActorNet>& actors, const std::filesystem::path& dir);

}  // namespace ccmarl::maddpg
