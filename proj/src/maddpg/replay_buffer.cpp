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

#include "ccmarl/maddpg/replay_buffer.hpp"

#include <algorithm>
#include <stdexcept>
#include <string>

namespace ccmarl::maddpg {
namespace {

// Row layout: obs | received | links | state | actions | messages | reward |
// env_reward | next_obs | next_received | next_state | done
struct Offsets {
  std::size_t obs, received, links, state, actions, messages, reward, env_reward, next_obs,
      next_received, next_state, done, width;

  explicit Offsets(const TransitionLayout& l) {
    const std::size_t n = l.n_agents;
    obs = 0;
    received = obs + n * l.obs_dim;
    links = received + n * l.received_dim;
    state = links + n * n;
    actions = state + l.state_dim;
    messages = actions + n * l.act_dim;
    reward = messages + n * l.msg_dim;
    env_reward = reward + 1;
    next_obs = env_reward + 1;
    next_received = next_obs + n * l.obs_dim;
    next_state = next_received + n * l.received_dim;
    done = next_state + l.state_dim;
    width = done + 1;
  }
};

void Put(double* dst, std::span<const double> src, std::size_t expected, const char* what) {
  if (src.size() != expected) {
    throw std::invalid_argument(std::string("replay buffer: ") + what + " has size " +
                                std::to_string(src.size()) + ", expected " +
                                std::to_string(expected));
  }
  std::copy(src.begin(), src.end(), dst);
}

nn::Matrix Take(const double* src, std::size_t rows, std::size_t cols) {
  nn::Matrix m(rows, cols);
  std::copy(src, src + rows * cols, m.data());
  return m;
}

}  // namespace

std::size_t TransitionLayout::width() const { return Offsets(*this).width; }

ReplayBuffer::ReplayBuffer(TransitionLayout layout, std::size_t capacity)
    : layout_(layout), width_(layout.width()), capacity_(capacity) {
  if (capacity == 0) throw std::invalid_argument("replay buffer: capacity must be positive");
}

void ReplayBuffer::Push(const Transition& t) {
  const Offsets o(layout_);
  const std::size_t n = layout_.n_agents;
  std::vector<double> row(width_);
  Put(row.data() + o.obs, t.observations.values(), n * layout_.obs_dim, "observations");
  Put(row.data() + o.received, t.received.values(), n * layout_.received_dim, "received");
  if (t.links.size() != n) throw std::invalid_argument("replay buffer: link matrix size");
  for (std::size_t k = 0; k < n * n; ++k) row[o.links + k] = t.links.bits()[k];
  Put(row.data() + o.state, t.state, layout_.state_dim, "state");
  Put(row.data() + o.actions, t.actions.values(), n * layout_.act_dim, "actions");
  Put(row.data() + o.messages, t.messages.values(), n * layout_.msg_dim, "messages");
  row[o.reward] = t.reward;
  row[o.env_reward] = t.env_reward;
  Put(row.data() + o.next_obs, t.next_observations.values(), n * layout_.obs_dim,
      "next observations");
  Put(row.data() + o.next_received, t.next_received.values(), n * layout_.received_dim,
      "next received");
  Put(row.data() + o.next_state, t.next_state, layout_.state_dim, "next state");
  row[o.done] = t.done ? 1.0 : 0.0;

  if (size_ < capacity_) {
    rows_.insert(rows_.end(), row.begin(), row.end());
    ++size_;
  } else {
    std::copy(row.begin(), row.end(), rows_.begin() + static_cast<std::ptrdiff_t>(head_ * width_));
    head_ = (head_ + 1) % capacity_;
  }
}

const double* ReplayBuffer::Row(std::size_t i) const {
  if (i >= size_) throw std::out_of_range("replay buffer: index past end");
  return rows_.data() + ((head_ + i) % size_) * width_;
}

Transition ReplayBuffer::At(std::size_t i) const {
  const Offsets o(layout_);
  const std::size_t n = layout_.n_agents;
  const double* r = Row(i);
  Transition t;
  t.observations = Take(r + o.obs, n, layout_.obs_dim);
  t.received = Take(r + o.received, n, layout_.received_dim);
  t.links = channel::LinkStatus(n, false);
  for (std::size_t from = 0; from < n; ++from) {
    for (std::size_t to = 0; to < n; ++to) t.links.Set(from, to, r[o.links + from * n + to] != 0.0);
  }
  t.state.assign(r + o.state, r + o.state + layout_.state_dim);
  t.actions = Take(r + o.actions, n, layout_.act_dim);
  t.messages = Take(r + o.messages, n, layout_.msg_dim);
  t.reward = r[o.reward];
  t.env_reward = r[o.env_reward];
  t.next_observations = Take(r + o.next_obs, n, layout_.obs_dim);
  t.next_received = Take(r + o.next_received, n, layout_.received_dim);
  t.next_state.assign(r + o.next_state, r + o.next_state + layout_.state_dim);
  t.done = r[o.done] != 0.0;
  return t;
}

TransitionBatch ReplayBuffer::Gather(std::span<const std::size_t> indices) const {
  const Offsets o(layout_);
  const std::size_t n = layout_.n_agents;
  const std::size_t b = indices.size();
  const std::size_t in_dim = layout_.obs_dim + layout_.received_dim;
  TransitionBatch batch;
  batch.actor_inputs.assign(n, nn::Matrix(b, in_dim));
  batch.next_actor_inputs.assign(n, nn::Matrix(b, in_dim));
  batch.states = nn::Matrix(b, layout_.state_dim);
  batch.next_states = nn::Matrix(b, layout_.state_dim);
  batch.actions = nn::Matrix(b, n * layout_.act_dim);
  batch.messages = nn::Matrix(b, n * layout_.msg_dim);
  batch.rewards.resize(b);
  batch.dones.resize(b);
  for (std::size_t k = 0; k < b; ++k) {
    const double* r = Row(indices[k]);
    for (std::size_t i = 0; i < n; ++i) {
      double* dst = batch.actor_inputs[i].row(k).data();
      std::copy_n(r + o.obs + i * layout_.obs_dim, layout_.obs_dim, dst);
      std::copy_n(r + o.received + i * layout_.received_dim, layout_.received_dim,
                  dst + layout_.obs_dim);
      double* next = batch.next_actor_inputs[i].row(k).data();
      std::copy_n(r + o.next_obs + i * layout_.obs_dim, layout_.obs_dim, next);
      std::copy_n(r + o.next_received + i * layout_.received_dim, layout_.received_dim,
                  next + layout_.obs_dim);
    }
    std::copy_n(r + o.state, layout_.state_dim, batch.states.row(k).data());
    std::copy_n(r + o.next_state, layout_.state_dim, batch.next_states.row(k).data());
    std::copy_n(r + o.actions, n * layout_.act_dim, batch.actions.row(k).data());
    std::copy_n(r + o.messages, n * layout_.msg_dim, batch.messages.row(k).data());
    batch.rewards[k] = r[o.reward];
    batch.dones[k] = r[o.done];
  }
  return batch;
}

TransitionBatch ReplayBuffer::Sample(std::size_t batch_size, Rng& rng) const {
  if (batch_size == 0 || batch_size > size_) {
    throw std::invalid_argument("replay buffer: batch of " + std::to_string(batch_size) +
                                " requested from " + std::to_string(size_) + " transitions");
  }
  std::vector<std::size_t> idx(batch_size);
  for (auto& i : idx) i = UniformIndex(rng, size_);
  return Gather(idx);
}

}  // namespace ccmarl::maddpg
