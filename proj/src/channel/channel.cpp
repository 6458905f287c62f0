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

#include "ccmarl/channel/channel.hpp"

#include <algorithm>
#include <charconv>
#include <cmath>
#include <fstream>
#include <istream>
#include <sstream>
#include <stdexcept>

namespace ccmarl::channel {
namespace {

template <class... Ts>
struct Overloaded : Ts... {
  using Ts::operator()...;
};

std::string FormatNumber(double v) {
  std::ostringstream os;
  os << v;
  return os.str();
}

double ParseNumber(std::string_view text, std::string_view label) {
  double v = 0.0;
  const auto [ptr, ec] = std::from_chars(text.data(), text.data() + text.size(), v);
  if (ec != std::errc() || ptr != text.data() + text.size()) {
    throw std::invalid_argument("channel: bad number in '" + std::string(label) + "'");
  }
  return v;
}

std::size_t SampleNext(const MarkovChain& m, std::size_t from, Rng& rng) {
  const double u = UniformReal(rng, 0.0, 1.0);
  double cumulative = 0.0;
  for (std::size_t to = 0; to < m.k; ++to) {
    cumulative += m.P(from, to);
    if (u < cumulative) return to;
  }
  // Rounding left u above the final partial sum: take the last reachable state.
  for (std::size_t to = m.k; to-- > 0;) {
    if (m.P(from, to) > 0.0) return to;
  }
  return from;
}

bool IsLossless(const MarkovChain& m, std::size_t s) {
  return std::find(m.lossless_states.begin(), m.lossless_states.end(), s) !=
         m.lossless_states.end();
}

}  // namespace

void Validate(const ChannelModel& model) {
  std::visit(Overloaded{
                 [](const Unrestricted&) {},
                 [](const Dropout& d) {
                   if (!(d.p >= 0.0 && d.p <= 1.0)) {
                     throw std::invalid_argument("channel: dropout p outside [0,1]");
                   }
                 },
                 [](const MarkovChain& m) {
                   if (m.k == 0 || m.transition.size() != m.k * m.k) {
                     throw std::invalid_argument("channel: transition matrix must be k x k");
                   }
                   for (std::size_t r = 0; r < m.k; ++r) {
                     double sum = 0.0;
                     for (std::size_t c = 0; c < m.k; ++c) {
                       const double p = m.P(r, c);
                       if (!(p >= 0.0)) {
                         throw std::invalid_argument("channel: negative transition probability");
                       }
                       sum += p;
                     }
                     if (std::abs(sum - 1.0) > 1e-12) {
                       throw std::invalid_argument("channel: row " + std::to_string(r) +
                                                   " does not sum to 1");
                     }
                   }
                   if (m.lossless_states.empty()) {
                     throw std::invalid_argument("channel: no lossless state");
                   }
                   for (std::size_t s : m.lossless_states) {
                     if (s >= m.k) throw std::invalid_argument("channel: lossless state out of range");
                   }
                 },
                 [](const DistanceThreshold& d) {
                   if (!(d.d >= 0.0)) throw std::invalid_argument("channel: threshold must be >= 0");
                 },
             },
             model);
}

std::string Describe(const ChannelModel& model) {
  return std::visit(Overloaded{
                        [](const Unrestricted&) { return std::string("unrestricted"); },
                        [](const Dropout& d) { return "dropout-" + FormatNumber(d.p); },
                        [](const MarkovChain& m) {
                          return std::string(m.shared_chain ? "mbc-shared-" : "mbc-") +
                                 std::to_string(m.k);
                        },
                        [](const DistanceThreshold& d) { return "dbc-" + FormatNumber(d.d); },
                    },
                    model);
}

ChannelModel ParseChannel(std::string_view label) {
  if (label == "unrestricted" || label == "fc") return Unrestricted{};
  if (label == "nocomm") return Dropout{1.0};
  if (label == "light-mbc") return MakeDefaultMbc(3);
  if (label == "medium-mbc") return MakeDefaultMbc(6);
  if (label == "heavy-mbc") return MakeDefaultMbc(8);
  if (label == "light-dbc") return DistanceThreshold{5.0};
  if (label == "medium-dbc") return DistanceThreshold{3.0};
  if (label == "heavy-dbc") return DistanceThreshold{1.0};
  auto suffix = [&](std::string_view prefix) -> std::string_view {
    return label.substr(prefix.size());
  };
  if (label.starts_with("dropout-")) {
    Dropout d{ParseNumber(suffix("dropout-"), label)};
    Validate(d);
    return d;
  }
  if (label.starts_with("mbc-shared-")) {
    MarkovChain m = MakeDefaultMbc(static_cast<std::size_t>(ParseNumber(suffix("mbc-shared-"), label)));
    m.shared_chain = true;
    return m;
  }
  if (label.starts_with("mbc-")) {
    return MakeDefaultMbc(static_cast<std::size_t>(ParseNumber(suffix("mbc-"), label)));
  }
  if (label.starts_with("dbc-")) {
    DistanceThreshold d{ParseNumber(suffix("dbc-"), label)};
    Validate(d);
    return d;
  }
  throw std::invalid_argument("unknown channel '" + std::string(label) + "'");
}

std::vector<std::string> StandardEvalChannels() {
  return {"unrestricted", "light-mbc", "medium-mbc", "heavy-mbc",
          "light-dbc",    "medium-dbc", "heavy-dbc"};
}

MarkovChain MakeDefaultMbc(std::size_t k) {
  if (k < 2) throw std::invalid_argument("channel: default MBC needs k >= 2");
  MarkovChain m;
  m.k = k;
  m.transition.assign(k * k, 1.0 / static_cast<double>(k));
  m.lossless_states = {0};
  return m;
}

MarkovChain LoadMbcMatrix(std::istream& in) {
  std::size_t k = 0;
  if (!(in >> k) || k == 0) throw std::runtime_error("mbc matrix: bad dimension line");
  MarkovChain m;
  m.k = k;
  m.transition.assign(k * k, 0.0);
  for (std::size_t r = 0; r < k; ++r) {
    double sum = 0.0;
    for (std::size_t c = 0; c < k; ++c) {
      double p = 0.0;
      if (!(in >> p)) throw std::runtime_error("mbc matrix: truncated at row " + std::to_string(r));
      if (!(p >= 0.0)) throw std::runtime_error("mbc matrix: negative entry in row " + std::to_string(r));
      m.transition[r * k + c] = p;
      sum += p;
    }
    if (std::abs(sum - 1.0) > 1e-6) {
      throw std::runtime_error("mbc matrix: row " + std::to_string(r) + " sums to " +
                               FormatNumber(sum));
    }
    for (std::size_t c = 0; c < k; ++c) m.transition[r * k + c] /= sum;
  }
  m.lossless_states = {0};
  Validate(m);
  return m;
}

MarkovChain LoadMbcMatrixFile(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw std::runtime_error("mbc matrix: cannot read " + path.string());
  return LoadMbcMatrix(in);
}

double StationaryLossRate(const MarkovChain& model) {
  Validate(model);
  const std::size_t k = model.k;
  // Started from the lossless state links begin in.
  std::vector<double> pi(k, 0.0);
  pi[model.lossless_states.front()] = 1.0;
  std::vector<double> next(k);
  constexpr std::size_t kMaxIterations = 1'000'000;
  bool converged = false;
  for (std::size_t it = 0; it < kMaxIterations; ++it) {
    std::fill(next.begin(), next.end(), 0.0);
    for (std::size_t r = 0; r < k; ++r) {
      for (std::size_t c = 0; c < k; ++c) next[c] += pi[r] * model.P(r, c);
    }
    double change = 0.0;
    for (std::size_t s = 0; s < k; ++s) change += std::abs(next[s] - pi[s]);
    pi.swap(next);
    if (change < 1e-12) {
      converged = true;
      break;
    }
  }
  if (!converged) throw std::runtime_error("stationary_loss_rate: power iteration did not converge");
  double lossy = 0.0;
  for (std::size_t s = 0; s < k; ++s) {
    if (!IsLossless(model, s)) lossy += pi[s];
  }
  return lossy;
}

MarkovLinkState InitialLinkState(const ChannelModel& model, std::size_t n_agents) {
  MarkovLinkState chain;
  chain.n = n_agents;
  if (const auto* m = std::get_if<MarkovChain>(&model)) {
    chain.state.assign(m->shared_chain ? 1 : n_agents * n_agents, m->lossless_states.front());
  }
  return chain;
}

LinkStatus AdvanceLinks(const ChannelModel& model, MarkovLinkState& chain,
                        std::span<const env::Vec2> positions, Rng& rng) {
  const std::size_t n = positions.size();
  LinkStatus links(n, true);
  std::visit(
      Overloaded{
          [](const Unrestricted&) {},
          [&](const Dropout& d) {
            for (std::size_t j = 0; j < n; ++j) {
              for (std::size_t i = 0; i < n; ++i) {
                if (i != j) links.Set(j, i, !Bernoulli(rng, d.p));
              }
            }
          },
          [&](const MarkovChain& m) {
            if (chain.n != n) throw std::logic_error("advance_links: chain state sized for another team");
            if (m.shared_chain) {
              chain.state[0] = SampleNext(m, chain.state[0], rng);
              const bool up = IsLossless(m, chain.state[0]);
              for (std::size_t j = 0; j < n; ++j) {
                for (std::size_t i = 0; i < n; ++i) {
                  if (i != j) links.Set(j, i, up);
                }
              }
              return;
            }
            for (std::size_t j = 0; j < n; ++j) {
              for (std::size_t i = 0; i < n; ++i) {
                if (i == j) continue;
                std::size_t& s = chain.state[j * n + i];
                s = SampleNext(m, s, rng);
                links.Set(j, i, IsLossless(m, s));
              }
            }
          },
          [&](const DistanceThreshold& d) {
            for (std::size_t j = 0; j < n; ++j) {
              for (std::size_t i = j + 1; i < n; ++i) {
                const bool up = env::Distance(positions[i], positions[j]) <= d.d;
                links.Set(j, i, up);
                links.Set(i, j, up);
              }
            }
          },
      },
      model);
  return links;
}

nn::Matrix Deliver(const nn::Matrix& sent, const LinkStatus& links) {
  const std::size_t n = sent.rows();
  const std::size_t dim = sent.cols();
  if (links.size() != n) throw std::invalid_argument("deliver: link matrix size mismatch");
  nn::Matrix received(n, n == 0 ? 0 : (n - 1) * dim);
  for (std::size_t i = 0; i < n; ++i) {
    auto dst = received.row(i);
    std::size_t slot = 0;
    for (std::size_t j = 0; j < n; ++j) {
      if (j == i) continue;
      if (links.Delivered(j, i)) {
        const auto src = sent.row(j);
        std::copy(src.begin(), src.end(), dst.begin() + static_cast<std::ptrdiff_t>(slot * dim));
      }
      ++slot;
    }
  }
  return received;
}

Channel::Channel(ChannelModel model, std::size_t n_agents)
    : model_(std::move(model)), n_agents_(n_agents) {
  Validate(model_);
  Reset();
}

void Channel::Reset() { chain_ = InitialLinkState(model_, n_agents_); }

LinkStatus Channel::Advance(std::span<const env::Vec2> positions, Rng& rng) {
  return AdvanceLinks(model_, chain_, positions, rng);
}

}  // namespace ccmarl::channel
