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

#include "ccmarl/env/particle_env.hpp"

#include <algorithm>
#include <numbers>
#include <ostream>
#include <stdexcept>
#include <string>

namespace ccmarl::env {
namespace {

constexpr std::size_t kReferenceLandmarks = 3;
constexpr std::size_t kTagObstacles = 2;

double Clamp1(double v) { return std::clamp(v, -1.0, 1.0); }

Vec2 RandomPoint(Rng& rng, double half_extent) {
  const double x = UniformReal(rng, -half_extent, half_extent);
  const double y = UniformReal(rng, -half_extent, half_extent);
  return {x, y};
}

double MovableRadius(const ScenarioConfig& cfg) {
  return cfg.scenario == Scenario::kTag ? cfg.predator_radius : cfg.agent_radius;
}

// Contact force on a from b, zero unless the bodies overlap.
Vec2 ContactForce(Vec2 a, Vec2 b, double min_dist, const ScenarioConfig& cfg) {
  const Vec2 delta = a - b;
  const double dist = delta.Norm();
  if (dist >= min_dist) return {};
  const double k = cfg.contact_margin;
  const double penetration = k * std::log1p(std::exp(-(dist - min_dist) / k));
  const Vec2 dir = dist > 0.0 ? delta * (1.0 / dist) : Vec2{1.0, 0.0};
  return dir * (cfg.contact_stiffness * penetration);
}

void Integrate(Body& body, Vec2 force, const ScenarioConfig& cfg) {
  body.vel = body.vel * (1.0 - cfg.damping) + force * cfg.dt;
  body.pos += body.vel * cfg.dt;
}

}  // namespace

std::string_view ScenarioName(Scenario s) {
  switch (s) {
    case Scenario::kSpread:
      return "spread";
    case Scenario::kTag:
      return "tag";
    case Scenario::kReference:
      return "reference";
  }
  return "spread";
}

Scenario ParseScenario(std::string_view name) {
  if (name == "spread" || name == "simple_spread") return Scenario::kSpread;
  if (name == "tag" || name == "simple_tag") return Scenario::kTag;
  if (name == "reference" || name == "simple_reference") return Scenario::kReference;
  throw std::invalid_argument("unknown scenario '" + std::string(name) + "'");
}

ScenarioConfig ScenarioConfig::Defaults(Scenario scenario) {
  return Defaults(scenario, scenario == Scenario::kReference ? 2 : 3);
}

ScenarioConfig ScenarioConfig::Defaults(Scenario scenario, std::size_t n_agents) {
  ScenarioConfig cfg;
  cfg.scenario = scenario;
  cfg.n_agents = n_agents;
  if (scenario == Scenario::kReference) {
    cfg.fov_radius = std::numeric_limits<double>::infinity();
  }
  return cfg;
}

std::size_t ScenarioConfig::num_landmarks() const {
  switch (scenario) {
    case Scenario::kSpread:
      return n_agents;
    case Scenario::kTag:
      return kTagObstacles;
    case Scenario::kReference:
      return kReferenceLandmarks;
  }
  return 0;
}

void ScenarioConfig::Validate() const {
  if (n_agents < 2) throw std::invalid_argument("scenario: n_agents must be >= 2");
  if (episode_length < 1) throw std::invalid_argument("scenario: episode_length must be >= 1");
  if (!(dt > 0.0)) throw std::invalid_argument("scenario: dt must be positive");
  if (!(damping >= 0.0 && damping < 1.0)) throw std::invalid_argument("scenario: damping outside [0,1)");
  if (!(fov_radius >= 0.0)) throw std::invalid_argument("scenario: fov_radius must be >= 0");
  if (scenario == Scenario::kTag && prey_candidates == 0) {
    throw std::invalid_argument("scenario: prey needs at least one candidate");
  }
  if (!(prey_reach_min >= 0.0 && prey_reach_max > prey_reach_min)) {
    throw std::invalid_argument("scenario: prey reach annulus is empty");
  }
}

WorldState Reset(const ScenarioConfig& cfg, Rng& rng) {
  cfg.Validate();
  WorldState s;
  s.agents.resize(cfg.n_agents);
  for (Body& a : s.agents) a.pos = RandomPoint(rng, cfg.world_half_extent);
  s.landmarks.resize(cfg.num_landmarks());
  for (Vec2& l : s.landmarks) l = RandomPoint(rng, cfg.world_half_extent);
  if (cfg.scenario == Scenario::kTag) {
    s.prey = Body{RandomPoint(rng, cfg.world_half_extent), {}};
  }
  if (cfg.scenario == Scenario::kReference) {
    s.targets.resize(cfg.n_agents);
    for (std::size_t& t : s.targets) t = UniformIndex(rng, s.landmarks.size());
  }
  s.t = 0;
  return s;
}

StepResult Step(const WorldState& state, const ScenarioConfig& cfg, const JointAction& actions,
                Rng& rng) {
  if (state.t >= cfg.episode_length) throw std::logic_error("step: episode already done");
  if (actions.size() != cfg.n_agents) {
    throw std::invalid_argument("step: expected " + std::to_string(cfg.n_agents) +
                                " actions, got " + std::to_string(actions.size()));
  }
  StepResult result;
  WorldState& next = result.state;
  next = state;

  const std::size_t n = cfg.n_agents;
  std::vector<Vec2> forces(n);
  for (std::size_t i = 0; i < n; ++i) {
    forces[i] = Vec2{Clamp1(actions[i].x), Clamp1(actions[i].y)} * cfg.agent_force_scale;
  }
  Vec2 prey_force;
  if (cfg.scenario == Scenario::kTag) {
    prey_force = PreyPolicy(state, cfg, rng) * cfg.prey_force_scale;
  }

  if (cfg.scenario != Scenario::kReference) {
    const double r = MovableRadius(cfg);
    for (std::size_t i = 0; i < n; ++i) {
      for (std::size_t j = i + 1; j < n; ++j) {
        const Vec2 f = ContactForce(state.agents[i].pos, state.agents[j].pos, 2.0 * r, cfg);
        forces[i] += f;
        forces[j] -= f;
      }
    }
  }
  if (cfg.scenario == Scenario::kTag) {
    const Vec2 prey_pos = state.prey->pos;
    for (std::size_t i = 0; i < n; ++i) {
      const Vec2 f = ContactForce(state.agents[i].pos, prey_pos,
                                  cfg.predator_radius + cfg.prey_radius, cfg);
      forces[i] += f;
      prey_force -= f;
      for (const Vec2& obstacle : state.landmarks) {
        forces[i] += ContactForce(state.agents[i].pos, obstacle,
                                  cfg.predator_radius + cfg.obstacle_radius, cfg);
      }
    }
    for (const Vec2& obstacle : state.landmarks) {
      prey_force += ContactForce(prey_pos, obstacle, cfg.prey_radius + cfg.obstacle_radius, cfg);
    }
  }

  for (std::size_t i = 0; i < n; ++i) Integrate(next.agents[i], forces[i], cfg);
  if (next.prey) Integrate(*next.prey, prey_force, cfg);

  next.t = state.t + 1;
  result.reward = ScenarioReward(next, cfg);
  result.done = next.t == cfg.episode_length;
  return result;
}

std::size_t ObservationDim(const ScenarioConfig& cfg) {
  std::size_t dim = 4 + 2 * cfg.num_landmarks() + 2 * (cfg.n_agents - 1);
  if (cfg.scenario == Scenario::kTag) dim += 2;
  if (cfg.scenario == Scenario::kReference) dim += cfg.num_landmarks();
  return dim;
}

nn::Vector Observe(const WorldState& state, const ScenarioConfig& cfg, std::size_t agent) {
  if (agent >= state.agents.size()) throw std::out_of_range("observe: agent index out of range");
  nn::Vector obs;
  obs.reserve(ObservationDim(cfg));
  const Body& self = state.agents[agent];
  auto push_relative = [&](Vec2 other) {
    const Vec2 rel = other - self.pos;
    if (rel.Norm() > cfg.fov_radius) {
      obs.push_back(0.0);
      obs.push_back(0.0);
    } else {
      obs.push_back(rel.x);
      obs.push_back(rel.y);
    }
  };
  obs.push_back(self.pos.x);
  obs.push_back(self.pos.y);
  obs.push_back(self.vel.x);
  obs.push_back(self.vel.y);
  for (const Vec2& l : state.landmarks) push_relative(l);
  for (std::size_t j = 0; j < state.agents.size(); ++j) {
    if (j != agent) push_relative(state.agents[j].pos);
  }
  if (cfg.scenario == Scenario::kTag) push_relative(state.prey->pos);
  if (cfg.scenario == Scenario::kReference) {
    const std::size_t partner = (agent + 1) % state.agents.size();
    for (std::size_t l = 0; l < state.landmarks.size(); ++l) {
      obs.push_back(state.targets[partner] == l ? 1.0 : 0.0);
    }
  }
  return obs;
}

std::size_t GlobalStateDim(const ScenarioConfig& cfg) {
  std::size_t dim = 4 * cfg.n_agents + 2 * cfg.num_landmarks();
  if (cfg.scenario == Scenario::kTag) dim += 4;
  if (cfg.scenario == Scenario::kReference) dim += cfg.n_agents * cfg.num_landmarks();
  return dim;
}

nn::Vector GlobalState(const WorldState& state, const ScenarioConfig& cfg) {
  nn::Vector s;
  s.reserve(GlobalStateDim(cfg));
  for (const Body& a : state.agents) {
    s.insert(s.end(), {a.pos.x, a.pos.y, a.vel.x, a.vel.y});
  }
  for (const Vec2& l : state.landmarks) s.insert(s.end(), {l.x, l.y});
  if (state.prey) {
    s.insert(s.end(), {state.prey->pos.x, state.prey->pos.y, state.prey->vel.x, state.prey->vel.y});
  }
  for (std::size_t target : state.targets) {
    for (std::size_t l = 0; l < state.landmarks.size(); ++l) s.push_back(target == l ? 1.0 : 0.0);
  }
  return s;
}

double ScenarioReward(const WorldState& state, const ScenarioConfig& cfg) {
  switch (cfg.scenario) {
    case Scenario::kSpread: {
      double reward = 0.0;
      for (const Vec2& l : state.landmarks) {
        double nearest = std::numeric_limits<double>::infinity();
        for (const Body& a : state.agents) nearest = std::min(nearest, Distance(a.pos, l));
        reward -= nearest;
      }
      std::size_t collisions = 0;
      for (std::size_t i = 0; i < state.agents.size(); ++i) {
        for (std::size_t j = i + 1; j < state.agents.size(); ++j) {
          if (Distance(state.agents[i].pos, state.agents[j].pos) < 2.0 * cfg.agent_radius) {
            ++collisions;
          }
        }
      }
      return reward - cfg.collision_penalty * static_cast<double>(collisions);
    }
    case Scenario::kTag: {
      std::size_t contacts = 0;
      for (const Body& a : state.agents) {
        if (Distance(a.pos, state.prey->pos) < cfg.predator_radius + cfg.prey_radius) ++contacts;
      }
      return cfg.capture_bonus * static_cast<double>(contacts);
    }
    case Scenario::kReference: {
      std::size_t arrived = 0;
      for (std::size_t i = 0; i < state.agents.size(); ++i) {
        if (Distance(state.agents[i].pos, state.landmarks[state.targets[i]]) <= cfg.arrival_radius) {
          ++arrived;
        }
      }
      return cfg.arrival_bonus * static_cast<double>(arrived);
    }
  }
  return 0.0;
}

PreyCandidates ScorePreyCandidates(const WorldState& state, const ScenarioConfig& cfg, Rng& rng) {
  if (cfg.scenario != Scenario::kTag || !state.prey) {
    throw std::logic_error("prey_policy: only defined for the tag scenario");
  }
  const Vec2 origin = state.prey->pos;
  std::vector<Vec2> visible;
  for (const Body& a : state.agents) {
    if (Distance(a.pos, origin) <= cfg.prey_perception) visible.push_back(a.pos);
  }
  PreyCandidates out;
  out.positions.reserve(cfg.prey_candidates);
  out.scores.reserve(cfg.prey_candidates);
  const double r2_min = cfg.prey_reach_min * cfg.prey_reach_min;
  const double r2_max = cfg.prey_reach_max * cfg.prey_reach_max;
  for (std::size_t c = 0; c < cfg.prey_candidates; ++c) {
    const double angle = UniformReal(rng, 0.0, 2.0 * std::numbers::pi);
    const double radius = std::sqrt(UniformReal(rng, r2_min, r2_max));
    const Vec2 p = origin + Vec2{std::cos(angle), std::sin(angle)} * radius;
    double score = 0.0;
    if (std::abs(p.x) > cfg.prey_arena_half_extent || std::abs(p.y) > cfg.prey_arena_half_extent) {
      score = -std::numeric_limits<double>::infinity();
    } else if (!visible.empty()) {
      score = std::numeric_limits<double>::infinity();
      for (const Vec2& pred : visible) score = std::min(score, Distance(p, pred));
    }
    out.positions.push_back(p);
    out.scores.push_back(score);
  }
  out.best = 0;
  for (std::size_t c = 1; c < out.scores.size(); ++c) {
    if (out.scores[c] > out.scores[out.best]) out.best = c;
  }
  return out;
}

Vec2 PreyPolicy(const WorldState& state, const ScenarioConfig& cfg, Rng& rng) {
  const PreyCandidates cands = ScorePreyCandidates(state, cfg, rng);
  const Vec2 dir = cands.positions[cands.best] - state.prey->pos;
  const double len = dir.Norm();
  if (len == 0.0) return {};
  return {Clamp1(dir.x / len), Clamp1(dir.y / len)};
}

void WriteTrajectoryHeader(std::ostream& out) { out << "t,agent,px,py,vx,vy,reward\n"; }

void AppendTrajectoryRows(std::ostream& out, const WorldState& state, double reward) {
  for (std::size_t i = 0; i < state.agents.size(); ++i) {
    const Body& a = state.agents[i];
    out << state.t << ',' << i << ',' << a.pos.x << ',' << a.pos.y << ',' << a.vel.x << ','
        << a.vel.y << ',' << reward << '\n';
  }
}

}  // namespace ccmarl::env
