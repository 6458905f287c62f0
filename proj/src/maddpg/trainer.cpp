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

#include "ccmarl/maddpg/trainer.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <numeric>
#include <ostream>
#include <string>

namespace ccmarl::maddpg {

using nn::Matrix;
using nn::Vector;

namespace {

enum Stream : std::uint64_t { kInit = 1, kEnv, kChannel, kNoise, kSample, kDumie };

std::vector<env::Vec2> Positions(const env::WorldState& w) {
  std::vector<env::Vec2> out;
  out.reserve(w.agents.size());
  for (const auto& a : w.agents) out.push_back(a.pos);
  return out;
}

dumie::DuMieConfig ResolvedDumie(const TrainConfig& cfg) {
  dumie::DuMieConfig d = cfg.dumie;
  d.msg_dim = cfg.msg_dim;
  d.act_dim = cfg.act_dim;
  return d;
}

// Splits a batched actor output into its action and message columns.
void SplitOutput(const Matrix& out, std::size_t act_dim, Matrix& action, Matrix& message) {
  action = nn::ColumnSlice(out, 0, act_dim);
  message = nn::ColumnSlice(out, act_dim, out.cols() - act_dim);
}

}  // namespace

void TrainConfig::Validate() const {
  env.Validate();
  channel::Validate(train_channel);
  auto fail = [](const std::string& what) { throw std::invalid_argument("train config: " + what); };
  if (!(gamma >= 0.0 && gamma < 1.0)) fail("gamma must be in [0, 1)");
  if (!(tau > 0.0 && tau <= 1.0)) fail("tau must be in (0, 1]");
  if (!(actor_lr > 0.0) || !(critic_lr > 0.0)) fail("learning rates must be positive");
  if (batch_size == 0) fail("batch_size must be positive");
  if (batch_size > buffer_capacity) fail("batch_size exceeds buffer_capacity");
  if (update_every == 0) fail("update_every must be positive");
  if (warmup + update_every < batch_size) fail("warmup + update_every must cover one batch");
  if (act_dim != 2) fail("act_dim must be 2 (planar forces)");
  if (hidden == 0) fail("hidden must be positive");
  if (noise_decay_fraction < 0.0) fail("noise_decay_fraction must be non-negative");
  if (dumie.update_every == 0) fail("shaping update_every must be positive");
  if (dumie.coeffs.alpha < 0.0 || dumie.coeffs.beta < 0.0) fail("alpha and beta must be >= 0");
  if (dumie.buffer_capacity == 0 || dumie.update_batch == 0) fail("shaping buffers must be nonempty");
}

RunStreams::RunStreams(std::uint64_t seed)
    : init(DeriveSeed(seed, kInit)),
      env(DeriveSeed(seed, kEnv)),
      channel(DeriveSeed(seed, kChannel)),
      noise(DeriveSeed(seed, kNoise)),
      sample(DeriveSeed(seed, kSample)),
      dumie(DeriveSeed(seed, kDumie)) {}

void WriteMetricsHeader(std::ostream& out) {
  out << "step,episode,return,td_loss,policy_loss,jsd_loss,club_loss,noise_scale\n";
}

void WriteMetricsRow(std::ostream& out, const MetricsRow& r) {
  char buf[256];
  std::snprintf(buf, sizeof(buf), "%zu,%zu,%.10g,%.10g,%.10g,%.10g,%.10g,%.10g\n", r.step,
                r.episode, r.episode_return, r.td_loss, r.policy_loss, r.jsd_loss, r.club_loss,
                r.noise_scale);
  out << buf;
}

Matrix CriticInput(const Matrix& states, const std::vector<Matrix>& actions,
                   const std::vector<Matrix>& messages) {
  const std::size_t b = states.rows();
  std::size_t width = states.cols();
  for (std::size_t i = 0; i < actions.size(); ++i) width += actions[i].cols() + messages[i].cols();
  Matrix in(b, width);
  for (std::size_t r = 0; r < b; ++r) {
    double* dst = in.row(r).data();
    dst = std::copy_n(states.row(r).data(), states.cols(), dst);
    for (std::size_t i = 0; i < actions.size(); ++i) {
      dst = std::copy_n(actions[i].row(r).data(), actions[i].cols(), dst);
      dst = std::copy_n(messages[i].row(r).data(), messages[i].cols(), dst);
    }
  }
  return in;
}

namespace {

void SplitStored(const TransitionBatch& batch, std::size_t n, std::size_t act_dim,
                 std::size_t msg_dim, std::vector<Matrix>& actions, std::vector<Matrix>& messages) {
  actions.resize(n);
  messages.resize(n);
  for (std::size_t i = 0; i < n; ++i) {
    actions[i] = nn::ColumnSlice(batch.actions, i * act_dim, act_dim);
    messages[i] = nn::ColumnSlice(batch.messages, i * msg_dim, msg_dim);
  }
}

}  // namespace

double CriticUpdate(CriticNet& critic, const std::vector<ActorNet>& actors,
                    const TransitionBatch& batch, double gamma) {
  const std::size_t n = actors.size();
  const std::size_t b = batch.size();
  if (b == 0) throw std::invalid_argument("critic update: empty batch");

  std::vector<Matrix> next_actions(n), next_messages(n);
  for (std::size_t i = 0; i < n; ++i) {
    const Matrix out = actors[i].target.Forward(batch.next_actor_inputs[i]);
    SplitOutput(out, actors[i].act_dim(), next_actions[i], next_messages[i]);
  }
  const Matrix q_next =
      critic.target.Forward(CriticInput(batch.next_states, next_actions, next_messages));

  std::vector<Matrix> actions, messages;
  SplitStored(batch, n, actors.front().act_dim(), actors.front().msg_dim(), actions, messages);
  nn::ForwardCache cache;
  const Matrix q = critic.net.Forward(CriticInput(batch.states, actions, messages), &cache);

  Matrix grad(b, 1);
  double loss = 0.0;
  const double inv_b = 1.0 / static_cast<double>(b);
  for (std::size_t r = 0; r < b; ++r) {
    const double y = batch.rewards[r] + gamma * (1.0 - batch.dones[r]) * q_next(r, 0);
    const double e = q(r, 0) - y;
    loss += e * e;
    grad(r, 0) = 2.0 * e * inv_b;
  }
  loss *= inv_b;

  Vector param_grad(critic.net.parameter_count(), 0.0);
  critic.net.Backward(cache, grad, param_grad);
  critic.adam.Step(critic.net.mutable_parameters(), param_grad);
  return loss;
}

double ActorUpdate(std::vector<ActorNet>& actors, std::size_t agent, const CriticNet& critic,
                   const TransitionBatch& batch) {
  const std::size_t n = actors.size();
  const std::size_t b = batch.size();
  if (agent >= n) throw std::out_of_range("actor update: agent index");
  if (b == 0) throw std::invalid_argument("actor update: empty batch");
  ActorNet& actor = actors[agent];

  std::vector<Matrix> actions, messages;
  SplitStored(batch, n, actor.act_dim(), actor.msg_dim(), actions, messages);
  nn::ForwardCache actor_cache;
  const Matrix out = actor.net.Forward(batch.actor_inputs[agent], &actor_cache);
  SplitOutput(out, actor.act_dim(), actions[agent], messages[agent]);

  nn::ForwardCache critic_cache;
  const Matrix q = critic.net.Forward(CriticInput(batch.states, actions, messages), &critic_cache);
  double mean_q = 0.0;
  for (std::size_t r = 0; r < b; ++r) mean_q += q(r, 0);
  mean_q /= static_cast<double>(b);

  const Matrix dq(b, 1, -1.0 / static_cast<double>(b));
  Vector scratch(critic.net.parameter_count(), 0.0);
  const Matrix d_input = critic.net.Backward(critic_cache, dq, scratch);
  const Matrix d_out = nn::ColumnSlice(d_input, critic.BlockOffset(agent), actor.output_dim());

  Vector param_grad(actor.net.parameter_count(), 0.0);
  actor.net.Backward(actor_cache, d_out, param_grad);
  actor.adam.Step(actor.net.mutable_parameters(), param_grad);
  return -mean_q;
}

void SoftUpdateTargets(std::vector<ActorNet>& actors, CriticNet& critic, double tau) {
  for (auto& a : actors) nn::SoftUpdate(a.target, a.net, tau);
  nn::SoftUpdate(critic.target, critic.net, tau);
}

EvalResult SummarizeReturns(std::vector<double> returns) {
  EvalResult r;
  r.returns = std::move(returns);
  if (r.returns.empty()) return r;
  const double n = static_cast<double>(r.returns.size());
  r.mean = std::accumulate(r.returns.begin(), r.returns.end(), 0.0) / n;
  double ss = 0.0;
  for (double x : r.returns) ss += (x - r.mean) * (x - r.mean);
  r.std = std::sqrt(ss / n);
  return r;
}

EpisodeState BeginEpisode(const env::ScenarioConfig& env_cfg, channel::Channel& channel,
                          std::size_t msg_dim, Rng& env_rng, Rng& channel_rng) {
  const std::size_t n = env_cfg.n_agents;
  EpisodeState ep;
  ep.world = env::Reset(env_cfg, env_rng);
  channel.Reset();
  ep.links = channel.Advance(Positions(ep.world), channel_rng);
  ep.received = Matrix(n, (n - 1) * msg_dim);
  ep.prev_messages = Matrix(n, msg_dim);
  ep.has_prev = false;
  return ep;
}

Transition AdvanceEpisode(EpisodeState& ep, const std::vector<ActorNet>& actors,
                          const env::ScenarioConfig& env_cfg, channel::Channel& channel,
                          Rng& env_rng, Rng& channel_rng, std::vector<nn::OuNoise>* noise,
                          Rng* noise_rng) {
  const std::size_t n = env_cfg.n_agents;
  const std::size_t act_dim = actors.front().act_dim();
  const std::size_t msg_dim = actors.front().msg_dim();
  Transition tr;
  tr.observations = Matrix(n, actors.front().obs_dim());
  tr.actions = Matrix(n, act_dim);
  tr.messages = Matrix(n, msg_dim);
  tr.received = ep.received;
  tr.links = ep.links;
  tr.state = env::GlobalState(ep.world, env_cfg);

  env::JointAction joint(n);
  for (std::size_t i = 0; i < n; ++i) {
    const Vector o = env::Observe(ep.world, env_cfg, i);
    std::copy(o.begin(), o.end(), tr.observations.row(i).begin());
    const ActOutput out = Act(actors[i], o, ep.received.row(i),
                              noise != nullptr ? &(*noise)[i] : nullptr, noise_rng);
    std::copy(out.action.begin(), out.action.end(), tr.actions.row(i).begin());
    std::copy(out.message.begin(), out.message.end(), tr.messages.row(i).begin());
    joint[i] = {out.action[0], out.action[1]};
  }

  env::StepResult step = env::Step(ep.world, env_cfg, joint, env_rng);
  tr.reward = step.reward;
  tr.env_reward = step.reward;
  tr.done = step.done;
  ep.world = std::move(step.state);

  tr.next_observations = Matrix(n, actors.front().obs_dim());
  for (std::size_t i = 0; i < n; ++i) {
    const Vector o = env::Observe(ep.world, env_cfg, i);
    std::copy(o.begin(), o.end(), tr.next_observations.row(i).begin());
  }
  tr.next_state = env::GlobalState(ep.world, env_cfg);

  ep.links = channel.Advance(Positions(ep.world), channel_rng);
  ep.received = channel::Deliver(tr.messages, ep.links);
  ep.prev_messages = tr.messages;
  ep.has_prev = true;
  tr.next_received = ep.received;
  return tr;
}

EvalResult Evaluate(const std::vector<ActorNet>& actors, const env::ScenarioConfig& env_cfg,
                    const channel::ChannelModel& eval_channel, std::size_t n_episodes,
                    std::uint64_t seed) {
  if (actors.size() != env_cfg.n_agents) {
    throw std::invalid_argument("evaluate: actor count does not match n_agents");
  }
  Rng env_rng(DeriveSeed(seed, kEnv));
  Rng channel_rng(DeriveSeed(seed, kChannel));
  channel::Channel channel(eval_channel, env_cfg.n_agents);
  std::vector<double> returns;
  returns.reserve(n_episodes);
  for (std::size_t e = 0; e < n_episodes; ++e) {
    EpisodeState ep =
        BeginEpisode(env_cfg, channel, actors.front().msg_dim(), env_rng, channel_rng);
    double total = 0.0;
    for (;;) {
      const Transition tr =
          AdvanceEpisode(ep, actors, env_cfg, channel, env_rng, channel_rng, nullptr, nullptr);
      total += tr.env_reward;
      if (tr.done) break;
    }
    returns.push_back(total);
  }
  return SummarizeReturns(std::move(returns));
}

Trainer::Trainer(const TrainConfig& config)
    : config_((config.Validate(), config)),
      obs_dim_(env::ObservationDim(config.env)),
      received_dim_((config.env.n_agents - 1) * config.msg_dim),
      state_dim_(env::GlobalStateDim(config.env)),
      rng_(config.seed),
      dumie_(config.env.n_agents, ResolvedDumie(config), rng_.init),
      replay_({config.env.n_agents, obs_dim_, received_dim_, state_dim_, config.act_dim,
               config.msg_dim},
              config.buffer_capacity),
      channel_(config.train_channel, config.env.n_agents) {
  config_.dumie = ResolvedDumie(config_);
  const std::size_t n = config_.env.n_agents;
  for (std::size_t i = 0; i < n; ++i) {
    actors_.emplace_back(obs_dim_, received_dim_, config_.act_dim, config_.msg_dim,
                         config_.hidden, config_.actor_lr, rng_.init);
    noise_.emplace_back(config_.act_dim, config_.ou);
  }
  critic_ = CriticNet(state_dim_, n, config_.act_dim, config_.msg_dim, config_.hidden,
                      config_.critic_lr, rng_.init);
  const std::size_t len = config_.env.episode_length;
  const std::size_t run_episodes = (config_.total_steps + len - 1) / len;
  decay_episodes_ = static_cast<std::size_t>(
      std::floor(config_.noise_decay_fraction * static_cast<double>(run_episodes)));
}

void Trainer::StartEpisode(EpisodeState& ep) {
  ep = BeginEpisode(config_.env, channel_, config_.msg_dim, rng_.env, rng_.channel);
  const double scale = nn::LinearDecayScale(episode_, decay_episodes_);
  for (auto& z : noise_) {
    z.Reset();
    z.DecayTo(scale);
  }
}

Transition Trainer::Step(EpisodeState& ep, bool explore) {
  const bool shape = ep.has_prev && dumie_.active();
  const Matrix sent = ep.prev_messages;
  Transition tr = AdvanceEpisode(ep, actors_, config_.env, channel_, rng_.env, rng_.channel,
                                 explore ? &noise_ : nullptr, explore ? &rng_.noise : nullptr);
  if (shape) {
    tr.reward = dumie_.Shape(tr.env_reward, sent, tr.actions, tr.links, rng_.dumie);
    dumie_.Record(sent, tr.actions, tr.links);
  }
  return tr;
}

std::vector<Transition> Trainer::CollectEpisode(bool explore) {
  EpisodeState ep;
  StartEpisode(ep);
  std::vector<Transition> out;
  for (;;) {
    out.push_back(Step(ep, explore));
    if (out.back().done) break;
  }
  return out;
}

void Trainer::Check(double value, const char* what) const {
  if (std::isfinite(value)) return;
  if (diverged_dir_) SaveNetworks(actors_, critic_, *diverged_dir_);
  throw TrainingDiverged(std::string("training diverged: non-finite ") + what + " at step " +
                         std::to_string(total_));
}

void Trainer::RunUpdateRound(std::ostream* metrics) {
  const TransitionBatch batch = replay_.Sample(config_.batch_size, rng_.sample);
  MetricsRow row;
  row.step = total_;
  row.episode = episode_;
  try {
    row.td_loss = CriticUpdate(critic_, actors_, batch, config_.gamma);
    Check(row.td_loss, "td loss");
    double policy = 0.0;
    for (std::size_t i = 0; i < actors_.size(); ++i) {
      const double l = ActorUpdate(actors_, i, critic_, batch);
      Check(l, "policy loss");
      policy += l;
    }
    row.policy_loss = policy / static_cast<double>(actors_.size());
    SoftUpdateTargets(actors_, critic_, config_.tau);
  } catch (const std::domain_error& e) {
    if (diverged_dir_) SaveNetworks(actors_, critic_, *diverged_dir_);
    throw TrainingDiverged(std::string("training diverged at step ") + std::to_string(total_) +
                           ": " + e.what());
  }
  if (!pending_returns_.empty()) {
    last_return_ = std::accumulate(pending_returns_.begin(), pending_returns_.end(), 0.0) /
                   static_cast<double>(pending_returns_.size());
    pending_returns_.clear();
  }
  row.episode_return = last_return_;
  row.jsd_loss = last_cc_.jsd_loss;
  row.club_loss = last_cc_.club_loss;
  row.noise_scale = noise_.empty() ? 0.0 : noise_.front().scale();
  rows_.push_back(row);
  if (metrics != nullptr) WriteMetricsRow(*metrics, row);
}

void Trainer::Train(std::ostream* metrics,
                    const std::optional<std::filesystem::path>& diverged_dir) {
  diverged_dir_ = diverged_dir;
  if (metrics != nullptr) WriteMetricsHeader(*metrics);
  EpisodeState ep;
  double episode_return = 0.0;
  bool in_episode = false;
  while (total_ < config_.total_steps) {
    if (!in_episode) {
      StartEpisode(ep);
      episode_return = 0.0;
      in_episode = true;
    }
    Transition tr = Step(ep, true);
    episode_return += tr.env_reward;
    const bool done = tr.done;
    replay_.Push(tr);
    ++total_;

    if (dumie_.active() && total_ % config_.dumie.update_every == 0) {
      try {
        last_cc_ = dumie_.Update(rng_.dumie);
      } catch (const std::domain_error& e) {
        if (diverged_dir_) SaveNetworks(actors_, critic_, *diverged_dir_);
        throw TrainingDiverged(std::string("estimators diverged at step ") +
                               std::to_string(total_) + ": " + e.what());
      }
      ++dumie_updates_;
      Check(last_cc_.jsd_loss, "jsd loss");
      Check(last_cc_.club_loss, "club loss");
    }
    if (total_ > config_.warmup && (total_ - config_.warmup) % config_.update_every == 0) {
      RunUpdateRound(metrics);
    }
    if (done) {
      pending_returns_.push_back(episode_return);
      ++episode_;
      in_episode = false;
    }
  }
}

}  // namespace ccmarl::maddpg
