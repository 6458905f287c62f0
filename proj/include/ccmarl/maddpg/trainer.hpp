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
#include <filesystem>
#include <iosfwd>
#include <optional>
#include <stdexcept>
#include <string>
#include <vector>

#include "ccmarl/channel/channel.hpp"
#include "ccmarl/common/random.hpp"
#include "ccmarl/dumie/estimators.hpp"
#include "ccmarl/env/particle_env.hpp"
#include "ccmarl/maddpg/networks.hpp"
#include "ccmarl/maddpg/replay_buffer.hpp"
#include "ccmarl/nn/ou_noise.hpp"

namespace ccmarl::maddpg {

struct TrainConfig {
  env::ScenarioConfig env;
  channel::ChannelModel train_channel = channel::Unrestricted{};

  double gamma = 0.95;
  double tau = 0.01;
  double actor_lr = 1e-4;
  double critic_lr = 1e-3;
  std::size_t batch_size = 1024;
  std::size_t buffer_capacity = 100000;
  std::size_t total_steps = 200000;
  std::size_t update_every = 100;
  std::size_t warmup = 1024;
  std::size_t msg_dim = 8;
  std::size_t act_dim = 2;
  std::size_t hidden = 64;
  nn::OuParams ou;
  double noise_decay_fraction = 0.8;  // of the run's episodes

  // msg_dim / act_dim here are overwritten from the fields above.
  dumie::DuMieConfig dumie;

  std::uint64_t seed = 1;

  void Validate() const;
};

// Independent random streams for one run.
struct RunStreams {
  Rng init;
  Rng env;
  Rng channel;
  Rng noise;
  Rng sample;
  Rng dumie;

  explicit RunStreams(std::uint64_t seed);
};

struct MetricsRow {
  std::size_t step = 0;
  std::size_t episode = 0;
  double episode_return = 0.0;
  double td_loss = 0.0;
  double policy_loss = 0.0;
  double jsd_loss = 0.0;
  double club_loss = 0.0;
  double noise_scale = 0.0;
};

void WriteMetricsHeader(std::ostream& out);
void WriteMetricsRow(std::ostream& out, const MetricsRow& row);

class TrainingDiverged : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

// [states | per-agent (action, message) blocks]
nn::Matrix CriticInput(const nn::Matrix& states, const std::vector<nn::Matrix>& actions,
                       const std::vector<nn::Matrix>& messages);

// One TD step on the shared critic. Targets come from the target actors on
// the next inputs and the target critic. Returns mean squared TD error.
double CriticUpdate(CriticNet& critic, const std::vector<ActorNet>& actors,
                    const TransitionBatch& batch, double gamma);

// One deterministic policy-gradient step for actor i through the current
// critic; the other agents keep their stored actions and messages. Returns
// -mean Q.
double ActorUpdate(std::vector<ActorNet>& actors, std::size_t agent, const CriticNet& critic,
                   const TransitionBatch& batch);

void SoftUpdateTargets(std::vector<ActorNet>& actors, CriticNet& critic, double tau);

struct EvalResult {
  double mean = 0.0;
  double std = 0.0;  // population
  std::vector<double> returns;
};

EvalResult SummarizeReturns(std::vector<double> returns);

// Noise-free rollouts under the given channel.
EvalResult Evaluate(const std::vector<ActorNet>& actors, const env::ScenarioConfig& env_cfg,
                    const channel::ChannelModel& eval_channel, std::size_t n_episodes,
                    std::uint64_t seed);

// Rollout position within one episode.
struct EpisodeState {
  env::WorldState world;
  channel::LinkStatus links;  // delivers `received` this step
  nn::Matrix received;        // N x (N-1)*msg_dim
  nn::Matrix prev_messages;   // N x msg_dim, sent last step
  bool has_prev = false;
};

EpisodeState BeginEpisode(const env::ScenarioConfig& env_cfg, channel::Channel& channel,
                          std::size_t msg_dim, Rng& env_rng, Rng& channel_rng);

// Observe, act, step the world, then advance the links that will carry this
// step's messages. reward and env_reward are both the unshaped team reward.
Transition AdvanceEpisode(EpisodeState& ep, const std::vector<ActorNet>& actors,
                          const env::ScenarioConfig& env_cfg, channel::Channel& channel,
                          Rng& env_rng, Rng& channel_rng, std::vector<nn::OuNoise>* noise,
                          Rng* noise_rng);

class Trainer {
 public:
  explicit Trainer(const TrainConfig& config);

  // One episode from a fresh reset. With explore, actions carry OU noise at
  // the current scale. Nothing is stored and no updates run.
  std::vector<Transition> CollectEpisode(bool explore);

  // The full loop. Metrics rows are also streamed to metrics when given. On
  // a non-finite loss, networks are written to diverged_dir (when set) and
  // TrainingDiverged is thrown.
  void Train(std::ostream* metrics = nullptr,
             const std::optional<std::filesystem::path>& diverged_dir = std::nullopt);

  const TrainConfig& config() const { return config_; }
  const std::vector<ActorNet>& actors() const { return actors_; }
  std::vector<ActorNet>& mutable_actors() { return actors_; }
  const CriticNet& critic() const { return critic_; }
  const dumie::DuMie& dumie() const { return dumie_; }
  const ReplayBuffer& replay() const { return replay_; }
  const std::vector<MetricsRow>& metrics() const { return rows_; }
  std::size_t total_steps() const { return total_; }
  std::size_t episodes() const { return episode_; }
  std::size_t update_rounds() const { return rows_.size(); }
  std::size_t dumie_updates() const { return dumie_updates_; }

  std::size_t obs_dim() const { return obs_dim_; }
  std::size_t received_dim() const { return received_dim_; }
  std::size_t state_dim() const { return state_dim_; }

 private:
  void StartEpisode(EpisodeState& ep);
  Transition Step(EpisodeState& ep, bool explore);
  void RunUpdateRound(std::ostream* metrics);
  void Check(double value, const char* what) const;

  TrainConfig config_;
  std::size_t obs_dim_;
  std::size_t received_dim_;
  std::size_t state_dim_;
  RunStreams rng_;
  std::vector<ActorNet> actors_;
  CriticNet critic_;
  dumie::DuMie dumie_;
  ReplayBuffer replay_;
  channel::Channel channel_;
  std::vector<nn::OuNoise> noise_;

  std::size_t total_ = 0;
  std::size_t episode_ = 0;
  std::size_t decay_episodes_ = 0;
  std::size_t dumie_updates_ = 0;
  std::vector<MetricsRow> rows_;
  std::vector<double> pending_returns_;
  double last_return_ = 0.0;
  dumie::CcLossResult last_cc_;
  std::optional<std::filesystem::path> diverged_dir_;
};

}  // namespace ccmarl::maddpg
