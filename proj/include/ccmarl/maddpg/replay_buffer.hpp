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
#include <span>
#include <vector>

#include "ccmarl/channel/channel.hpp"
#include "ccmarl/common/random.hpp"
#include "ccmarl/nn/matrix.hpp"

namespace ccmarl::maddpg {

// One environment step for the whole team.
struct Transition {
  nn::Matrix observations;  // N x obs_dim
  nn::Matrix received;      // N x (N-1)*msg_dim, as delivered this step
  channel::LinkStatus links;
  nn::Vector state;
  nn::Matrix actions;   // N x act_dim, as executed (after noise and clamping)
  nn::Matrix messages;  // N x msg_dim, emitted this step
  double reward = 0.0;      // shaped
  double env_reward = 0.0;  // unshaped team reward
  nn::Matrix next_observations;
  nn::Matrix next_received;
  nn::Vector next_state;
  bool done = false;
};

struct TransitionLayout {
  std::size_t n_agents = 0;
  std::size_t obs_dim = 0;
  std::size_t received_dim = 0;
  std::size_t state_dim = 0;
  std::size_t act_dim = 0;
  std::size_t msg_dim = 0;

  std::size_t width() const;
  bool operator==(const TransitionLayout&) const = default;
};

// Column-batched view of sampled transitions, shaped for network passes.
struct TransitionBatch {
  std::vector<nn::Matrix> actor_inputs;       // per agent: B x (obs | received)
  std::vector<nn::Matrix> next_actor_inputs;  // per agent, at t+1
  nn::Matrix states;
  nn::Matrix next_states;
  nn::Matrix actions;   // B x N*act_dim, agent-major
  nn::Matrix messages;  // B x N*msg_dim, agent-major
  nn::Vector rewards;
  nn::Vector dones;

  std::size_t size() const { return rewards.size(); }
};

// FIFO ring of transitions packed as fixed-width rows. Sampling is uniform
// with replacement.
class ReplayBuffer {
 public:
  ReplayBuffer(TransitionLayout layout, std::size_t capacity);

  void Push(const Transition& t);
  Transition At(std::size_t i) const;  // 0 is the oldest stored transition

  TransitionBatch Gather(std::span<const std::size_t> indices) const;
  // Throws std::invalid_argument when batch_size exceeds size().
  TransitionBatch Sample(std::size_t batch_size, Rng& rng) const;

  std::size_t size() const { return size_; }
  std::size_t capacity() const { return capacity_; }
  const TransitionLayout& layout() const { return layout_; }

 private:
  const double* Row(std::size_t i) const;

  TransitionLayout layout_;
  std::size_t width_;
  std::size_t capacity_;
  std::size_t size_ = 0;
  std::size_t head_ = 0;  // slot of the oldest row once full
  std::vector<double> rows_;
};

}  // namespace ccmarl::maddpg
