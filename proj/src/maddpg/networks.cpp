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

#include "ccmarl/maddpg/networks.hpp"

#include <algorithm>
#include <array>
#include <stdexcept>
#include <string>

#include "ccmarl/nn/checkpoint.hpp"

namespace ccmarl::maddpg {

using nn::Activation;

ActorNet::ActorNet(std::size_t obs_dim, std::size_t received_dim, std::size_t act_dim,
                   std::size_t msg_dim, std::size_t hidden, double lr, Rng& rng)
    : obs_dim_(obs_dim), received_dim_(received_dim), act_dim_(act_dim), msg_dim_(msg_dim) {
  const std::array<std::size_t, 4> dims{obs_dim + received_dim, hidden, hidden, act_dim + msg_dim};
  const std::array<Activation, 3> acts{Activation::kRelu, Activation::kRelu, Activation::kTanh};
  net = nn::Mlp::Create(dims, acts, rng);
  target = net;
  adam = nn::Adam(net.parameter_count(), {.lr = lr});
}

ActOutput Act(const ActorNet& actor, std::span<const double> observation,
              std::span<const double> received, nn::OuNoise* noise, Rng* rng) {
  if (observation.size() != actor.obs_dim() || received.size() != actor.received_dim()) {
    throw std::invalid_argument("act: expected observation " + std::to_string(actor.obs_dim()) +
                                " and received " + std::to_string(actor.received_dim()) +
                                ", got " + std::to_string(observation.size()) + " and " +
                                std::to_string(received.size()));
  }
  nn::Vector input(observation.begin(), observation.end());
  input.insert(input.end(), received.begin(), received.end());
  const nn::Vector out = actor.net.Forward(input);
  const auto split = out.begin() + static_cast<std::ptrdiff_t>(actor.act_dim());
  ActOutput result{nn::Vector(out.begin(), split), nn::Vector(split, out.end())};
  if (noise != nullptr) {
    if (rng == nullptr) throw std::invalid_argument("act: exploration noise needs an rng");
    const nn::Vector eps = noise->Sample(*rng);
    for (std::size_t d = 0; d < result.action.size(); ++d) {
      result.action[d] = std::clamp(result.action[d] + eps[d], -1.0, 1.0);
    }
  }
  return result;
}

CriticNet::CriticNet(std::size_t state_dim, std::size_t n_agents, std::size_t act_dim,
                     std::size_t msg_dim, std::size_t hidden, double lr, Rng& rng)
    : state_dim_(state_dim), n_agents_(n_agents), block_dim_(act_dim + msg_dim) {
  const std::array<std::size_t, 4> dims{input_dim(), hidden, hidden, 1};
  const std::array<Activation, 3> acts{Activation::kRelu, Activation::kRelu,
                                       Activation::kIdentity};
  net = nn::Mlp::Create(dims, acts, rng);
  target = net;
  adam = nn::Adam(net.parameter_count(), {.lr = lr});
}

void SaveNetworks(const std::vector<ActorNet>& actors, const CriticNet& critic,
                  const std::filesystem::path& dir) {
  std::filesystem::create_directories(dir);
  for (std::size_t i = 0; i < actors.size(); ++i) {
    nn::SaveMlpFile(actors[i].net, dir / ("actor_" + std::to_string(i) + ".txt"));
  }
  nn::SaveMlpFile(critic.net, dir / "critic.txt");
}

void LoadActors(std::vector<ActorNet>& actors, const std::filesystem::path& dir) {
  for (std::size_t i = 0; i < actors.size(); ++i) {
    nn::Mlp loaded = nn::LoadMlpFile(dir / ("actor_" + std::to_string(i) + ".txt"));
    if (!loaded.SameArchitecture(actors[i].net)) {
      throw std::runtime_error("checkpoint: actor " + std::to_string(i) +
                               " architecture does not match the configuration");
    }
    actors[i].net = loaded;
    actors[i].target = std::move(loaded);
  }
}

}  // namespace ccmarl::maddpg
