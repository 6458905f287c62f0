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
#include <span>
#include <string>
#include <string_view>
#include <variant>
#include <vector>

#include "ccmarl/common/random.hpp"
#include "ccmarl/env/particle_env.hpp"
#include "ccmarl/nn/matrix.hpp"

namespace ccmarl::channel {

struct Unrestricted {};

// Each directed link is lost independently with probability p.
struct Dropout {
  double p = 0.0;
};

// Markov-based constraint: a k-state chain per directed link (or one chain for
// every link when shared_chain is set). A link delivers iff its chain sits in
// a lossless state.
struct MarkovChain {
  std::size_t k = 1;
  std::vector<double> transition{1.0};  // k x k, row-stochastic
  std::vector<std::size_t> lossless_states{0};
  bool shared_chain = false;

  double P(std::size_t from, std::size_t to) const { return transition[from * k + to]; }
};

// Distance-based constraint: deliver iff ||pos_i - pos_j|| <= d.
struct DistanceThreshold {
  double d = 0.0;
};

using ChannelModel = std::variant<Unrestricted, Dropout, MarkovChain, DistanceThreshold>;

void Validate(const ChannelModel& model);

// Short stable label, e.g. "unrestricted", "dropout-0.2", "mbc-6", "dbc-3".
std::string Describe(const ChannelModel& model);

// Accepts Describe() labels plus the named levels light/medium/heavy-mbc
// (k = 3/6/8), light/medium/heavy-dbc (d = 5/3/1), "fc" and "nocomm".
ChannelModel ParseChannel(std::string_view label);

// The seven evaluation channels of the main results grid, in display order.
std::vector<std::string> StandardEvalChannels();

// Uniform k x k transition matrix with state 0 lossless. Requires k >= 2.
MarkovChain MakeDefaultMbc(std::size_t k);

// Plain-text matrix: first token k, then k rows of k reals. Rows must sum to 1
// within 1e-6 and are renormalized exactly. State 0 is the lossless state.
MarkovChain LoadMbcMatrix(std::istream& in);
MarkovChain LoadMbcMatrixFile(const std::filesystem::path& path);

// Stationary mass on the lossy states, by power iteration to an L1 change
// below 1e-12. Throws std::runtime_error after 10^6 iterations.
double StationaryLossRate(const MarkovChain& model);

// N x N delivery matrix. Delivered(j, i) is iota^{ji}: the message from j to i
// arrives. The diagonal is unused and reads as delivered.
class LinkStatus {
 public:
  LinkStatus() = default;
  LinkStatus(std::size_t n, bool delivered) : n_(n), bits_(n * n, delivered ? 1 : 0) {}

  std::size_t size() const { return n_; }
  bool Delivered(std::size_t from, std::size_t to) const { return bits_[from * n_ + to] != 0; }
  void Set(std::size_t from, std::size_t to, bool delivered) {
    bits_[from * n_ + to] = delivered ? 1 : 0;
  }
  std::span<const std::uint8_t> bits() const { return bits_; }

  bool operator==(const LinkStatus&) const = default;

 private:
  std::size_t n_ = 0;
  std::vector<std::uint8_t> bits_;
};

// Chain state per directed pair, indexed [from * n + to]. Empty for models
// without memory.
struct MarkovLinkState {
  std::size_t n = 0;
  std::vector<std::size_t> state;
};

// Every chain starts in the first lossless state.
MarkovLinkState InitialLinkState(const ChannelModel& model, std::size_t n_agents);

LinkStatus AdvanceLinks(const ChannelModel& model, MarkovLinkState& chain,
                        std::span<const env::Vec2> positions, Rng& rng);

// Received messages. sent holds one broadcast message per sender (N x
// msg_dim). Row i of the result concatenates, in sender order skipping i,
// iota^{ji} * m^j; lost messages are exact zeros.
nn::Matrix Deliver(const nn::Matrix& sent, const LinkStatus& links);

// Channel model plus its per-episode memory.
class Channel {
 public:
  Channel(ChannelModel model, std::size_t n_agents);

  void Reset();
  LinkStatus Advance(std::span<const env::Vec2> positions, Rng& rng);

  const ChannelModel& model() const { return model_; }
  const MarkovLinkState& chain() const { return chain_; }

 private:
  ChannelModel model_;
  std::size_t n_agents_;
  MarkovLinkState chain_;
};

}  // namespace ccmarl::channel
