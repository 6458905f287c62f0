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

#include <cmath>
#include <cstddef>
#include <iosfwd>
#include <limits>
#include <optional>
#include <span>
#include <string_view>
#include <vector>

#include "ccmarl/common/random.hpp"
#include "ccmarl/nn/matrix.hpp"

namespace ccmarl::env {

enum class Scenario { kSpread, kTag, kReference };

std::string_view ScenarioName(Scenario s);
Scenario ParseScenario(std::string_view name);

struct Vec2 {
  double x = 0.0;
  double y = 0.0;

  Vec2 operator+(Vec2 o) const { return {x + o.x, y + o.y}; }
  Vec2 operator-(Vec2 o) const { return {x - o.x, y - o.y}; }
  Vec2 operator*(double s) const { return {x * s, y * s}; }
  Vec2& operator+=(Vec2 o) {
    x += o.x;
    y += o.y;
    return *this;
  }
  Vec2& operator-=(Vec2 o) {
    x -= o.x;
    y -= o.y;
    return *this;
  }
  double Norm() const { return std::hypot(x, y); }
  bool operator==(const Vec2&) const = default;
};

inline double Distance(Vec2 a, Vec2 b) { return (a - b).Norm(); }

struct ScenarioConfig {
  Scenario scenario = Scenario::kSpread;
  std::size_t n_agents = 3;
  std::size_t episode_length = 25;
  double dt = 0.1;
  double damping = 0.25;
  double fov_radius = 1.5;
  double world_half_extent = 1.0;  // spawn box is [-e, e]^2

  // Soft contact: force = stiffness * margin * log(1 + exp(-(d - d_min) / margin))
  // along the separating direction, applied while bodies overlap.
  double contact_stiffness = 100.0;
  double contact_margin = 1e-3;

  double agent_radius = 0.15;     // spread and reference agents
  double predator_radius = 0.075;  // tag learners
  double prey_radius = 0.05;
  double obstacle_radius = 0.2;

  double collision_penalty = 1.0;
  double capture_bonus = 10.0;
  double arrival_bonus = 1.0;
  double arrival_radius = 0.1;

  double agent_force_scale = 1.0;
  double prey_force_scale = 1.3;
  double prey_perception = 1.0;
  std::size_t prey_candidates = 100;
  double prey_reach_min = 0.05;
  double prey_reach_max = 0.25;
  double prey_arena_half_extent = 1.5;

  // Scenario defaults for everything above (reference: 2 agents, unlimited view).
  static ScenarioConfig Defaults(Scenario scenario);
  static ScenarioConfig Defaults(Scenario scenario, std::size_t n_agents);

  std::size_t num_landmarks() const;
  void Validate() const;
};

struct Body {
  Vec2 pos;
  Vec2 vel;
  bool operator==(const Body&) const = default;
};

struct WorldState {
  std::vector<Body> agents;
  std::vector<Vec2> landmarks;  // spread/reference targets, tag obstacles
  std::optional<Body> prey;     // tag only
  std::vector<std::size_t> targets;  // reference: landmark index per agent
  std::size_t t = 0;

  bool operator==(const WorldState&) const = default;
};

// One 2-D force per learning agent; components are clamped to [-1, 1].
using JointAction = std::vector<Vec2>;

struct StepResult {
  WorldState state;
  double reward = 0.0;
  bool done = false;
};

WorldState Reset(const ScenarioConfig& cfg, Rng& rng);

// Throws std::logic_error when the episode has already ended.
StepResult Step(const WorldState& state, const ScenarioConfig& cfg, const JointAction& actions,
                Rng& rng);

// Layout: own pos (2), own vel (2), landmarks relative (2 each), other agents
// relative in index order skipping self (2 each), prey relative (tag, 2),
// one-hot of the next agent's target landmark (reference). Entities farther
// than fov_radius read as exact zeros.
nn::Vector Observe(const WorldState& state, const ScenarioConfig& cfg, std::size_t agent);
std::size_t ObservationDim(const ScenarioConfig& cfg);

// Full state for the centralized critic: agent pos/vel, landmarks, prey
// pos/vel (tag), per-agent target one-hots (reference).
nn::Vector GlobalState(const WorldState& state, const ScenarioConfig& cfg);
std::size_t GlobalStateDim(const ScenarioConfig& cfg);

double ScenarioReward(const WorldState& state, const ScenarioConfig& cfg);

// Scripted prey. Samples candidate positions in an annulus around the prey,
// scores each by its distance to the nearest predator the prey can perceive,
// and returns a unit force toward the best one (first index wins ties).
Vec2 PreyPolicy(const WorldState& state, const ScenarioConfig& cfg, Rng& rng);

struct PreyCandidates {
  std::vector<Vec2> positions;
  std::vector<double> scores;
  std::size_t best = 0;
};
PreyCandidates ScorePreyCandidates(const WorldState& state, const ScenarioConfig& cfg, Rng& rng);

// Debug dump: header `t,agent,px,py,vx,vy,reward`, one row per agent.
void WriteTrajectoryHeader(std::ostream& out);
void AppendTrajectoryRows(std::ostream& out, const WorldState& state, double reward);

}  // namespace ccmarl::env
