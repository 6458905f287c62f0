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
#include <vector>

#include "ccmarl/common/random.hpp"
#include "ccmarl/common/ring_buffer.hpp"
#include "ccmarl/nn/matrix.hpp"

namespace ccmarl::dumie {

struct MessageActionPair {
  nn::Vector message;
  nn::Vector action;
};

using PairPool = RingBuffer<MessageActionPair>;

// (message, action) samples for one directed link, split by whether the
// message arrived: lossless pairs (link status 1) and lossy pairs (status 0).
class MessageBuffer {
 public:
  explicit MessageBuffer(std::size_t capacity = 1000)
      : lossless_(capacity), lossy_(capacity) {}

  // link must be 0 or 1; anything else throws std::invalid_argument.
  void Push(const nn::Vector& message, const nn::Vector& action, int link);

  const PairPool& lossless() const { return lossless_; }
  const PairPool& lossy() const { return lossy_; }

 private:
  PairPool lossless_;
  PairPool lossy_;
};

// One MessageBuffer per ordered pair (sender j, receiver i), j != i.
class PairBuffers {
 public:
  PairBuffers(std::size_t n_agents, std::size_t capacity);

  std::size_t n_agents() const { return n_; }
  MessageBuffer& at(std::size_t sender, std::size_t receiver);
  const MessageBuffer& at(std::size_t sender, std::size_t receiver) const;

 private:
  std::size_t n_;
  std::vector<MessageBuffer> buffers_;  // [sender * n + receiver]
};

struct PairBatch {
  nn::Matrix messages;
  nn::Matrix actions;
};

// min(count, pool.size()) distinct pairs chosen uniformly.
PairBatch SampleJoint(const PairPool& pool, std::size_t count, Rng& rng);

// count actions drawn uniformly with replacement, independent of any message.
nn::Matrix SampleMarginalActions(const PairPool& pool, std::size_t count, Rng& rng);

// Every action in the pool when it holds at most count pairs, otherwise count
// distinct actions chosen uniformly.
nn::Matrix SampleEstimatorActions(const PairPool& pool, std::size_t count, Rng& rng);

}  // namespace ccmarl::dumie
