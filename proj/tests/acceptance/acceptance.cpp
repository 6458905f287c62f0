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

// Acceptance checks. One PASS/FAIL line per criterion; exit code 1 on any failure.

#include <algorithm>
#include <chrono>
#include <cmath>
#include <cstdio>
#include <filesystem>
#include <functional>
#include <map>
#include <sstream>
#include <string>
#include <vector>

#include "CLI11.hpp"
#include "ccmarl/channel/channel.hpp"
#include "ccmarl/dumie/estimators.hpp"
#include "ccmarl/harness/config.hpp"
#include "ccmarl/harness/grid.hpp"
#include "ccmarl/harness/report.hpp"
#include "ccmarl/maddpg/networks.hpp"
#include "ccmarl/maddpg/replay_buffer.hpp"
#include "ccmarl/maddpg/trainer.hpp"
#include "ccmarl/nn/grad_check.hpp"
#include "ccmarl/nn/mlp.hpp"
#include "support/synthetic_mi.hpp"

namespace fs = std::filesystem;
using namespace ccmarl;
using nn::Matrix;

namespace {

struct Outcome {
  bool pass = false;
  std::string detail;
};

std::string Fmt(const char* f, double a = 0, double b = 0, double c = 0, double d = 0) {
  char buf[256];
  std::snprintf(buf, sizeof buf, f, a, b, c, d);
  return buf;
}

Matrix Random(Rng& rng, std::size_t r, std::size_t c) {
  Matrix m(r, c);
  for (double& v : m.values()) v = UniformReal(rng, -1.0, 1.0);
  return m;
}

void Randomize(nn::Mlp& net, Rng& rng) {
  for (double& p : net.mutable_parameters()) p = UniformReal(rng, -0.5, 0.5);
}

// ---- 1 -------------------------------------------------------------------

Outcome GradientCorrectness() {
  maddpg::Trainer probe(maddpg::TrainConfig{});
  const std::size_t n = probe.config().env.n_agents;
  const auto& tc = probe.config();
  Rng rng(101);
  double worst_actor = 0, worst_critic = 0, worst_jsd = 0, worst_club = 0;
  const double h = 1e-6;
  for (int trial = 0; trial < 20; ++trial) {
    maddpg::ActorNet actor(probe.obs_dim(), probe.received_dim(), tc.act_dim, tc.msg_dim,
                           tc.hidden, 1e-3, rng);
    maddpg::CriticNet critic(probe.state_dim(), n, tc.act_dim, tc.msg_dim, tc.hidden, 1e-3, rng);
    Randomize(actor.net, rng);
    Randomize(critic.net, rng);
    auto net_check = [&](nn::Mlp& net) {
      return nn::GradCheck(net, nn::SquaredErrorLoss(Random(rng, 3, net.output_dim())),
                           Random(rng, 3, net.input_dim()), h)
          .max_relative_error;
    };
    worst_actor = std::max(worst_actor, net_check(actor.net));
    worst_critic = std::max(worst_critic, net_check(critic.net));

    dumie::JsdNet jsd(tc.msg_dim, tc.act_dim, rng);
    Randomize(jsd.message_encoder, rng);
    Randomize(jsd.action_encoder, rng);
    Randomize(jsd.scorer, rng);
    const Matrix m = Random(rng, 4, tc.msg_dim), a = Random(rng, 4, tc.act_dim),
                 k = Random(rng, 4, tc.act_dim);
    dumie::JsdGradients g;
    dumie::JsdLoss(jsd, m, a, k, &g);
    auto jsd_loss = [&] { return dumie::JsdLoss(jsd, m, a, k, nullptr); };
    worst_jsd = std::max({worst_jsd,
                          nn::CheckGradient(jsd.message_encoder.mutable_parameters(),
                                            g.message_encoder, jsd_loss, h)
                              .max_relative_error,
                          nn::CheckGradient(jsd.action_encoder.mutable_parameters(),
                                            g.action_encoder, jsd_loss, h)
                              .max_relative_error,
                          nn::CheckGradient(jsd.scorer.mutable_parameters(), g.scorer, jsd_loss, h)
                              .max_relative_error});

    dumie::ClubNet club(tc.msg_dim, tc.act_dim, rng);
    Randomize(club.mean, rng);
    nn::Vector cg;
    dumie::ClubLoss(club, m, a, &cg);
    worst_club = std::max(worst_club,
                          nn::CheckGradient(club.mean.mutable_parameters(), cg,
                                            [&] { return dumie::ClubLoss(club, m, a, nullptr); }, h)
                              .max_relative_error);
  }
  const double worst = std::max({worst_actor, worst_critic, worst_jsd, worst_club});
  return {worst < 1e-5, Fmt("max rel err actor %.2e critic %.2e jsd %.2e club %.2e", worst_actor,
                            worst_critic, worst_jsd, worst_club)};
}

// ---- 2 -------------------------------------------------------------------

double EmpiricalLoss(const channel::ChannelModel& model, std::size_t calls, std::uint64_t seed) {
  const std::size_t n = 3;
  channel::Channel ch(model, n);
  Rng rng(seed);
  const std::vector<env::Vec2> pos(n);
  std::size_t lost = 0, total = 0;
  for (std::size_t t = 0; t < calls; ++t) {
    const auto l = ch.Advance(pos, rng);
    for (std::size_t a = 0; a < n; ++a) {
      for (std::size_t b = 0; b < n; ++b) {
        if (a == b) continue;
        lost += !l.Delivered(a, b);
        ++total;
      }
    }
  }
  return static_cast<double>(lost) / static_cast<double>(total);
}

Outcome ChannelStatistics() {
  bool ok = true;
  std::ostringstream d;
  auto rate = [&](const std::string& name, const channel::ChannelModel& m, double expect,
                  std::uint64_t seed) {
    const double got = EmpiricalLoss(m, 100000, seed);
    ok = ok && std::abs(got - expect) <= 0.01;
    d << name << " " << Fmt("%.4f/%.4f", got, expect) << "  ";
  };
  rate("dropout(0.2)", channel::Dropout{0.2}, 0.2, 1);
  rate("dropout(0.5)", channel::Dropout{0.5}, 0.5, 2);
  for (std::size_t k : {3u, 6u, 8u}) {
    const auto mbc = channel::MakeDefaultMbc(k);
    const double oracle = channel::StationaryLossRate(mbc);
    ok = ok && std::abs(oracle - (k - 1.0) / k) < 1e-9;
    rate("mbc(" + std::to_string(k) + ")", mbc, oracle, 10 + k);
  }

  Rng rng(7);
  channel::MarkovLinkState none;
  const std::vector<env::Vec2> line{{0, 0}, {0, 3}, {4, 0}};
  const auto l = channel::AdvanceLinks(channel::DistanceThreshold{3.0}, none, line, rng);
  bool dbc = l.Delivered(0, 1) && l.Delivered(1, 0) && !l.Delivered(0, 2) && !l.Delivered(2, 0) &&
             !l.Delivered(1, 2) && !l.Delivered(2, 1);
  for (int trial = 0; trial < 1000 && dbc; ++trial) {
    std::vector<env::Vec2> pos(6);
    for (auto& p : pos) p = {UniformReal(rng, -2, 2), UniformReal(rng, -2, 2)};
    const double thr = UniformReal(rng, 0.1, 3.0);
    const auto s = channel::AdvanceLinks(channel::DistanceThreshold{thr}, none, pos, rng);
    for (std::size_t a = 0; a < 6; ++a) {
      for (std::size_t b = 0; b < 6; ++b) {
        if (a == b) continue;
        const bool want = env::Distance(pos[a], pos[b]) <= thr;
        dbc = dbc && s.Delivered(a, b) == want && s.Delivered(a, b) == s.Delivered(b, a);
      }
    }
  }
  d << "dbc " << (dbc ? "exact+symmetric" : "MISMATCH");
  return {ok && dbc, d.str()};
}

// ---- 3 -------------------------------------------------------------------

Outcome EstimatorSanity() {
  std::ostringstream d;
  bool ok = true;
  double prev_jsd = -1e300;
  for (double rho : {0.0, 0.5, 0.9}) {
    const auto r = testing::RunMiTrial(rho, 2024);
    const double mi = testing::GaussianMi(rho);
    ok = ok && r.club >= mi - 0.1 && r.jsd > prev_jsd;
    prev_jsd = r.jsd;
    d << Fmt("rho %.1f MI %.4f CLUB %.4f JSD %.4f; ", rho, mi, r.club, r.jsd);
  }
  return {ok, d.str()};
}

// ---- 4 -------------------------------------------------------------------

Outcome UnitArithmetic() {
  Rng rng(3);
  dumie::JsdNet jsd(4, 2, rng);
  for (double& p : jsd.scorer.mutable_parameters()) p = 0.0;
  const double l3 = dumie::JsdLoss(jsd, Random(rng, 5, 4), Random(rng, 5, 2), Random(rng, 5, 2),
                                   nullptr);

  std::vector<maddpg::ActorNet> actors;
  for (int i = 0; i < 2; ++i) actors.emplace_back(3, 4, 2, 2, 8, 1e-3, rng);
  maddpg::CriticNet critic(5, 2, 2, 2, 8, 1e-3, rng);
  auto constant = [](nn::Mlp& net, double c) {
    for (double& p : net.mutable_parameters()) p = 0.0;
    net.mutable_bias(net.num_layers() - 1)[0] = c;
  };
  constant(critic.net, 1.0);
  constant(critic.target, 2.0);
  maddpg::TransitionBatch b;
  for (int i = 0; i < 2; ++i) {
    b.actor_inputs.push_back(Random(rng, 1, 7));
    b.next_actor_inputs.push_back(Random(rng, 1, 7));
  }
  b.states = Random(rng, 1, 5);
  b.next_states = Random(rng, 1, 5);
  b.actions = Random(rng, 1, 4);
  b.messages = Random(rng, 1, 4);
  b.rewards = {1.0};
  b.dones = {0.0};
  const double l7 = maddpg::CriticUpdate(critic, actors, b, 0.95);

  channel::LinkStatus links(3, true);
  links.Set(0, 1, false);
  const std::vector<double> jsd_est(9, 0.7), club_est(9, 1.3);
  bool exact = true;
  for (double r : {-1.2345678901234567, 0.0, 3.0e-300, 42.0}) {
    exact = exact && dumie::CombineShaping(r, links, jsd_est, club_est, {0.0, 0.0}) == r;
  }
  const bool ok = std::abs(l3 - 2 * std::log(2.0)) <= 1e-12 && std::abs(l7 - 3.61) <= 1e-12 && exact;
  return {ok, Fmt("jsd(T=0) %.15f  td %.15f  ", l3, l7) +
                  (exact ? "alpha=beta=0 bit-exact" : "alpha=beta=0 NOT exact")};
}

// ---- 5 -------------------------------------------------------------------

maddpg::TrainConfig ShortConfig() {
  maddpg::TrainConfig c;
  c.total_steps = 4024;
  c.warmup = 1024;
  c.batch_size = 256;
  c.dumie.coeffs = {0.01, 0.01};
  return c;
}

Outcome GatingIsolation() {
  maddpg::TrainConfig open = ShortConfig();
  open.train_channel = channel::Unrestricted{};
  maddpg::Trainer a(open);
  const auto club0 = a.dumie().club().ParameterHash();
  const auto jsd0 = a.dumie().jsd().ParameterHash();
  a.Train();

  maddpg::TrainConfig silent = ShortConfig();
  silent.train_channel = channel::Dropout{1.0};
  maddpg::Trainer b(silent);
  const auto club1 = b.dumie().club().ParameterHash();
  const auto jsd1 = b.dumie().jsd().ParameterHash();
  b.Train();

  const bool club_frozen = a.dumie().club().ParameterHash() == club0;
  const bool jsd_frozen = b.dumie().jsd().ParameterHash() == jsd1;
  const bool trained = a.dumie().jsd().ParameterHash() != jsd0 &&
                       b.dumie().club().ParameterHash() != club1;
  const bool ok = club_frozen && jsd_frozen && trained && a.dumie_updates() > 0;
  std::ostringstream d;
  d << "unrestricted: club " << (club_frozen ? "unchanged" : "CHANGED") << ", jsd "
    << (a.dumie().jsd().ParameterHash() != jsd0 ? "trained" : "untouched") << " ("
    << a.dumie_updates() << " estimator updates); dropout(1): jsd "
    << (jsd_frozen ? "unchanged" : "CHANGED") << ", club "
    << (b.dumie().club().ParameterHash() != club1 ? "trained" : "untouched");
  return {ok, d.str()};
}

// ---- 6 -------------------------------------------------------------------

Outcome Determinism() {
  auto run = [] {
    maddpg::TrainConfig c;
    c.dumie.coeffs = {0.01, 0.01};
    c.train_channel = channel::Dropout{0.2};
    maddpg::Trainer t(c);
    std::ostringstream csv;
    t.Train(&csv);
    return csv.str();
  };
  const std::string first = run();
  const std::string second = run();
  const auto lines = std::count(first.begin(), first.end(), '\n');
  return {first == second && lines > 1,
          std::to_string(lines) + " metrics lines over 2e5 steps, " +
              (first == second ? "identical" : "DIFFERENT")};
}

// ---- 7 -------------------------------------------------------------------

Outcome ProtocolInvariants() {
  std::ostringstream d;
  maddpg::TrainConfig c;
  c.hidden = 16;
  maddpg::Trainer t(c);
  bool episodes = true;
  for (int e = 0; e < 10; ++e) {
    const auto ep = t.CollectEpisode(true);
    episodes = episodes && ep.size() == 25;
    for (std::size_t s = 0; s < ep.size(); ++s) episodes = episodes && ep[s].done == (s == 24);
  }
  d << "episodes " << (episodes ? "25 steps" : "WRONG LENGTH") << "; ";

  const maddpg::TransitionLayout layout{1, 1, 1, 1, 1, 1};
  maddpg::ReplayBuffer buf(layout, 100000);
  auto tagged = [&](double tag) {
    maddpg::Transition tr;
    tr.observations = Matrix(1, 1, tag);
    tr.received = Matrix(1, 1, tag);
    tr.links = channel::LinkStatus(1, true);
    tr.state = {tag};
    tr.actions = Matrix(1, 1, tag);
    tr.messages = Matrix(1, 1, tag);
    tr.reward = tag;
    tr.next_observations = Matrix(1, 1, tag);
    tr.next_received = Matrix(1, 1, tag);
    tr.next_state = {tag};
    return tr;
  };
  const std::size_t pushed = 100000 + 1234;
  for (std::size_t k = 0; k < pushed; ++k) buf.Push(tagged(static_cast<double>(k)));
  const bool fifo = buf.size() == 100000 && buf.At(0).reward == 1234.0 &&
                    buf.At(99999).reward == static_cast<double>(pushed - 1);
  d << "replay " << (fifo ? "capped FIFO" : "WRONG") << "; ";

  Rng rng(9);
  std::vector<maddpg::ActorNet> actors;
  for (int i = 0; i < 3; ++i) actors.emplace_back(6, 8, 2, 4, 16, 1e-3, rng);
  maddpg::CriticNet critic(10, 3, 2, 4, 16, 1e-3, rng);
  for (auto& a : actors) Randomize(a.net, rng);
  Randomize(critic.net, rng);
  std::vector<nn::Vector> t0;
  for (auto& a : actors) t0.emplace_back(a.target.parameters().begin(), a.target.parameters().end());
  t0.emplace_back(critic.target.parameters().begin(), critic.target.parameters().end());
  const double tau = 0.01;
  for (int k = 0; k < 100; ++k) maddpg::SoftUpdateTargets(actors, critic, tau);
  const double keep = std::pow(1.0 - tau, 100);
  double worst = 0.0;
  auto compare = [&](const nn::Mlp& main, const nn::Mlp& target, const nn::Vector& start) {
    for (std::size_t i = 0; i < start.size(); ++i) {
      const double want = main.parameters()[i] + (start[i] - main.parameters()[i]) * keep;
      worst = std::max(worst, std::abs(target.parameters()[i] - want));
    }
  };
  for (std::size_t i = 0; i < actors.size(); ++i) compare(actors[i].net, actors[i].target, t0[i]);
  compare(critic.net, critic.target, t0.back());
  d << Fmt("soft update max deviation %.2e", worst);
  return {episodes && fifo && worst <= 1e-9, d.str()};
}

// ---- 8, 9 ----------------------------------------------------------------

const char* kDirectionalGrid = R"({
  "experiment": "acceptance",
  "scenario": "spread",
  "eval": {"channels": ["unrestricted", "medium-dbc"], "episodes": 100},
  "cells": [
    {"name": "cc", "algorithm": "cc", "seeds": [1, 2, 3, 4, 5]},
    {"name": "nocomm", "algorithm": "nocomm", "seeds": [1, 2, 3, 4, 5]},
    {"name": "alpha_only", "algorithm": "cc", "shaping": {"alpha": 0.01, "beta": 0}, "seeds": [1, 2, 3]},
    {"name": "beta_only", "algorithm": "cc", "shaping": {"alpha": 0, "beta": 0.01}, "seeds": [1, 2, 3]},
    {"name": "base", "algorithm": "cc", "shaping": {"alpha": 0, "beta": 0}, "seeds": [1, 2, 3]}
  ]
})";

// cell -> eval channel -> seed -> mean return
using Results = std::map<std::string, std::map<std::string, std::map<std::uint64_t, double>>>;

Results RunDirectional(const fs::path& runs, std::string& error) {
  harness::ExperimentSpec spec = harness::ParseConfig(kDirectionalGrid);
  spec.out = runs;
  std::ostringstream log;
  const auto s = harness::RunGrid(spec, {.parallel = 1, .log = &log});
  for (const auto& f : s.failures) error += f.cell + "/" + std::to_string(f.seed) + ": " + f.message + "; ";
  Results r;
  for (const auto& rep : harness::CollectReports(runs)) r[rep.cell][rep.eval_channel][rep.seed] = rep.mean;
  return r;
}

double Median(std::vector<double> v) {
  std::sort(v.begin(), v.end());
  const std::size_t n = v.size();
  return n % 2 ? v[n / 2] : 0.5 * (v[n / 2 - 1] + v[n / 2]);
}

Outcome CommunicationValue(const Results& r) {
  const auto& cc = r.at("cc").at("unrestricted");
  const auto& nc = r.at("nocomm").at("unrestricted");
  int wins = 0;
  std::ostringstream d;
  for (std::uint64_t seed = 1; seed <= 5; ++seed) {
    const double a = cc.at(seed), b = nc.at(seed);
    wins += a > b;
    d << Fmt("s%.0f %.1f vs %.1f; ", static_cast<double>(seed), a, b);
  }
  d << wins << "/5 seeds cc > nocomm";
  return {wins >= 4, d.str()};
}

Outcome AblationSynergy(const Results& r) {
  auto median = [&](const std::string& cell) {
    std::vector<double> v;
    const auto& m = r.at(cell).at("medium-dbc");
    for (std::uint64_t seed = 1; seed <= 3; ++seed) v.push_back(m.at(seed));
    return Median(v);
  };
  const double full = median("cc"), a = median("alpha_only"), b = median("beta_only"),
               base = median("base");
  return {full >= a && full >= b && full >= base,
          Fmt("medium-dbc medians: full %.2f alpha-only %.2f beta-only %.2f base %.2f", full, a, b,
              base)};
}

bool Report(int id, const std::function<Outcome()>& check) {
  const auto start = std::chrono::steady_clock::now();
  Outcome o;
  try {
    o = check();
  } catch (const std::exception& e) {
    o = {false, std::string("error: ") + e.what()};
  }
  const double secs =
      std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();
  std::printf("Criterion %d: %s - %s [%.1fs]\n", id, o.pass ? "PASS" : "FAIL", o.detail.c_str(),
              secs);
  std::fflush(stdout);
  return o.pass;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Acceptance criteria"};
  std::string range = "1-9";
  std::string runs = "acceptance_runs";
  app.add_option("--criteria", range, "Criterion or range, e.g. 3 or 1-7");
  app.add_option("--runs", runs, "Directory for the directional training runs (reused when present)");
  CLI11_PARSE(app, argc, argv);

  int lo = 1, hi = 9;
  const auto dash = range.find('-');
  try {
    lo = std::stoi(range.substr(0, dash));
    hi = dash == std::string::npos ? lo : std::stoi(range.substr(dash + 1));
  } catch (const std::exception&) {
    std::fprintf(stderr, "bad --criteria '%s'\n", range.c_str());
    return 2;
  }
  auto want = [&](int id) { return id >= lo && id <= hi; };

  bool ok = true;
  if (want(1)) ok &= Report(1, GradientCorrectness);
  if (want(2)) ok &= Report(2, ChannelStatistics);
  if (want(3)) ok &= Report(3, EstimatorSanity);
  if (want(4)) ok &= Report(4, UnitArithmetic);
  if (want(5)) ok &= Report(5, GatingIsolation);
  if (want(6)) ok &= Report(6, Determinism);
  if (want(7)) ok &= Report(7, ProtocolInvariants);
  if (want(8) || want(9)) {
    std::string error;
    Results results;
    try {
      results = RunDirectional(runs, error);
    } catch (const std::exception& e) {
      error += e.what();
    }
    if (!error.empty()) std::fprintf(stderr, "grid: %s\n", error.c_str());
    if (want(8)) ok &= Report(8, [&] { return CommunicationValue(results); });
    if (want(9)) ok &= Report(9, [&] { return AblationSynergy(results); });
  }
  return ok ? 0 : 1;
}
