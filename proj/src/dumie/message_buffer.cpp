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

#include "ccmarl/dumie/message_buffer.hpp"

#include <algorithm>
#include <numeric>
#include <stdexcept>
#include <string>

namespace ccmarl::dumie {
namespace {

// First `count` entries of a uniformly shuffled index range (partial
// Fisher-Yates).
std::vector<std::size_t> DistinctIndices(std::size_t n, std::size_t count, Rng& rng) {
  if (count <= 64 && count * 8 <= n) {
    // Floyd's sampling; avoids materializing the full range for small draws.
    std::vector<std::size_t> picked;
    picked.reserve(count);
    for (std::size_t j = n - count; j < n; ++j) {
      const std::size_t t = UniformIndex(rng, j + 1);
      const bool seen = std::find(picked.begin(), picked.end(), t) != picked.end();
      picked.push_back(seen ? j : t);
    }
    return picked;
  }
  std::vector<std::size_t> idx(n);
  std::iota(idx.begin(), idx.end(), 0);
  count = std::min(count, n);
  for (std::size_t i = 0; i < count; ++i) {
    const std::size_t j = i + UniformIndex(rng, n - i);
    std::swap(idx[i], idx[j]);
  }
  idx.resize(count);
  return idx;
}

nn::Matrix GatherActions(const PairPool& pool, const std::vector<std::size_t>& idx) {
  const std::size_t dim = pool[0].action.size();
  nn::Matrix out(idx.size(), dim);
  for (std::size_t r = 0; r < idx.size(); ++r) {
    const auto& a = pool[idx[r]].action;
    std::copy(a.begin(), a.end(), out.row(r).begin());
  }
  return out;
}

}  // namespace

void MessageBuffer::Push(const nn::Vector& message, const nn::Vector& action, int link) {
  if (link != 0 && link != 1) {
    throw std::invalid_argument("message buffer: link status must be 0 or 1, got " +
                                std::to_string(link));
  }
  (link == 1 ? lossless_ : lossy_).Push({message, action});
}

PairBuffers::PairBuffers(std::size_t n_agents, std::size_t capacity)
    : n_(n_agents), buffers_(n_agents * n_agents, MessageBuffer(capacity)) {}

MessageBuffer& PairBuffers::at(std::size_t sender, std::size_t receiver) {
  if (sender >= n_ || receiver >= n_ || sender == receiver) {
    throw std::out_of_range("pair buffers: invalid ordered pair");
  }
  return buffers_[sender * n_ + receiver];
}

const MessageBuffer& PairBuffers::at(std::size_t sender, std::size_t receiver) const {
  return const_cast<PairBuffers*>(this)->at(sender, receiver);
}

PairBatch SampleJoint(const PairPool& pool, std::size_t count, Rng& rng) {
  if (pool.empty()) return {};
  const auto idx = DistinctIndices(pool.size(), count, rng);
  const std::size_t mdim = pool[0].message.size();
  PairBatch batch{nn::Matrix(idx.size(), mdim), GatherActions(pool, idx)};
  for (std::size_t r = 0; r < idx.size(); ++r) {
    const auto& m = pool[idx[r]].message;
    std::copy(m.begin(), m.end(), batch.messages.row(r).begin());
  }
  return batch;
}

nn::Matrix SampleMarginalActions(const PairPool& pool, std::size_t count, Rng& rng) {
  if (pool.empty()) return {};
  std::vector<std::size_t> idx(count);
  for (auto& i : idx) i = UniformIndex(rng, pool.size());
  return GatherActions(pool, idx);
}

nn::Matrix SampleEstimatorActions(const PairPool& pool, std::size_t count, Rng& rng) {
  if (pool.empty()) return {};
  if (pool.size() <= count) {
    std::vector<std::size_t> all(pool.size());
    std::iota(all.begin(), all.end(), 0);
    return GatherActions(pool, all);
  }
  return GatherActions(pool, DistinctIndices(pool.size(), count, rng));
}

}  // namespace ccmarl::dumie
