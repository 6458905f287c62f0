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

#include <cmath>
#include <numbers>
#include <set>
#include <stdexcept>

#include <gtest/gtest.h>

#include "ccmarl/dumie/estimators.hpp"
#include "ccmarl/dumie/message_buffer.hpp"
#include "support/synthetic_mi.hpp"

namespace ccmarl::dumie {
namespace {

using nn::Matrix;
using nn::Vector;

const double kLn2 = std::log(2.0);
const double kLn2Pi = std::log(2.0 * std::numbers::pi);

void Zero(nn::Mlp& net) {
  for (double& p : net.mutable_parameters()) p = 0.0;
}

Matrix FromRows(std::initializer_list<std::initializer_list<double>> rows) {
  Matrix m(rows.size(), rows.begin()->size());
  std::size_t r = 0;
  for (const auto& row : rows) {
    std::size_t c = 0;
    for (double v : row) m(r, c++) = v;
    ++r;
  }
  return m;
}

// T(m, a) = a[0], independent of the message.
void WireScoreToFirstAction(JsdNet& net) {
  Zero(net.message_encoder);
  Zero(net.action_encoder);
  Zero(net.scorer);
  const std::size_t act_dim = net.action_encoder.input_dim();
  auto aw = net.action_encoder.mutable_weights(0);
  aw[0 * act_dim + 0] = 1.0;   // unit 0: relu(a0)
  aw[1 * act_dim + 0] = -1.0;  // unit 1: relu(-a0)
  const std::size_t in = 2 * JsdNet::kEncoderWidth;
  auto h = net.scorer.mutable_weights(0);
  h[0 * in + JsdNet::kEncoderWidth] = 1.0;
  h[1 * in + JsdNet::kEncoderWidth + 1] = 1.0;
  auto out = net.scorer.mutable_weights(1);
  out[0] = 1.0;
  out[1] = -1.0;
}

TEST(MessageBuffer, RoutesByLinkStatus) {
  MessageBuffer buf(10);
  buf.Push({1.0}, {2.0, 3.0}, 1);
  EXPECT_EQ(buf.lossless().size(), 1u);
  EXPECT_EQ(buf.lossy().size(), 0u);
  buf.Push({1.0}, {2.0, 3.0}, 0);
  EXPECT_EQ(buf.lossless().size(), 1u);
  EXPECT_EQ(buf.lossy().size(), 1u);
}

TEST(MessageBuffer, EvictsOldestFirst) {
  MessageBuffer buf(1000);
  for (int k = 0; k < 1001; ++k) buf.Push({static_cast<double>(k)}, {0.0, 0.0}, 0);
  EXPECT_EQ(buf.lossy().size(), 1000u);
  EXPECT_EQ(buf.lossy()[0].message[0], 1.0);
  EXPECT_EQ(buf.lossy()[999].message[0], 1000.0);
  EXPECT_TRUE(buf.lossless().empty());
}

TEST(MessageBuffer, RejectsBadLinkValue) {
  MessageBuffer buf(4);
  EXPECT_THROW(buf.Push({0.0}, {0.0}, 2), std::invalid_argument);
  EXPECT_THROW(buf.Push({0.0}, {0.0}, -1), std::invalid_argument);
}

TEST(Sampling, JointIsDistinctAndCapped) {
  PairPool pool(100);
  for (int k = 0; k < 5; ++k) pool.Push({{static_cast<double>(k)}, {static_cast<double>(k)}});
  Rng rng(3);
  const PairBatch all = SampleJoint(pool, 32, rng);
  ASSERT_EQ(all.messages.rows(), 5u);
  std::set<double> seen;
  for (std::size_t r = 0; r < 5; ++r) {
    EXPECT_EQ(all.messages(r, 0), all.actions(r, 0));
    seen.insert(all.messages(r, 0));
  }
  EXPECT_EQ(seen.size(), 5u);
  EXPECT_EQ(SampleEstimatorActions(pool, 32, rng).rows(), 5u);
  EXPECT_EQ(SampleEstimatorActions(pool, 3, rng).rows(), 3u);
  EXPECT_EQ(SampleMarginalActions(pool, 9, rng).rows(), 9u);
}

TEST(JsdLoss, ZeroScorerGivesTwoLn2) {
  Rng rng(1);
  JsdNet net(4, 2, rng);
  Zero(net.scorer);
  const Matrix m = FromRows({{0.1, 0.2, 0.3, 0.4}, {-1, 2, 0, 1}});
  const Matrix a = FromRows({{0.5, -0.5}, {1, 1}});
  const Matrix k = FromRows({{0, 0}, {-1, 0.3}});
  EXPECT_NEAR(JsdLoss(net, m, a, k, nullptr), 2.0 * kLn2, 1e-12);
}

TEST(JsdLoss, TwoSampleWorkedExample) {
  Rng rng(2);
  JsdNet net(2, 2, rng);
  WireScoreToFirstAction(net);
  const Matrix m = FromRows({{0.3, 0.1}, {-0.2, 0.7}});
  const Matrix joint = FromRows({{1, 0}, {-1, 0}});
  const Matrix marg = FromRows({{0, 0}, {2, 0}});
  const Vector t = net.Scores(m, joint);
  EXPECT_DOUBLE_EQ(t[0], 1.0);
  EXPECT_DOUBLE_EQ(t[1], -1.0);
  const double expected = (nn::Softplus(-1) + nn::Softplus(1)) / 2 +
                          (nn::Softplus(0) + nn::Softplus(2)) / 2;
  EXPECT_NEAR(JsdLoss(net, m, joint, marg, nullptr), expected, 1e-12);
  EXPECT_NEAR(expected, 2.22330, 1e-5);
}

TEST(JsdLoss, SaturatedScoresApproachZero) {
  Rng rng(2);
  JsdNet net(1, 1, rng);
  WireScoreToFirstAction(net);
  const Matrix m = FromRows({{0}, {0}});
  EXPECT_LT(JsdLoss(net, m, FromRows({{40}, {40}}), FromRows({{-40}, {-40}}), nullptr), 1e-15);
}

TEST(JsdLoss, PositiveAndGradientMatchesFiniteDifference) {
  Rng rng(5);
  JsdNet net(3, 2, rng);
  Rng data(6);
  Matrix m(6, 3), a(6, 2), k(6, 2);
  for (double& v : m.values()) v = UniformReal(data, -1, 1);
  for (double& v : a.values()) v = UniformReal(data, -1, 1);
  for (double& v : k.values()) v = UniformReal(data, -1, 1);
  JsdGradients g;
  const double loss = JsdLoss(net, m, a, k, &g);
  EXPECT_GT(loss, 0.0);
  auto check = [&](nn::Mlp& part, const Vector& grad) {
    auto p = part.mutable_parameters();
    for (std::size_t i = 0; i < p.size(); i += 7) {
      const double keep = p[i];
      const double h = 1e-6;
      part.mutable_parameters()[i] = keep + h;
      const double up = JsdLoss(net, m, a, k, nullptr);
      part.mutable_parameters()[i] = keep - h;
      const double down = JsdLoss(net, m, a, k, nullptr);
      part.mutable_parameters()[i] = keep;
      EXPECT_NEAR(grad[i], (up - down) / (2 * h), 1e-6) << "param " << i;
    }
  };
  check(net.message_encoder, g.message_encoder);
  check(net.action_encoder, g.action_encoder);
  check(net.scorer, g.scorer);
}

TEST(JsdEstimate, ZeroScorerGivesMinusTwoLn2) {
  Rng rng(1);
  JsdNet net(2, 2, rng);
  Zero(net.scorer);
  const Matrix marg = FromRows({{0.1, 0.2}, {0.3, -1}, {1, 1}});
  EXPECT_NEAR(JsdEstimate(net, Vector{0.5, 0.5}, Vector{0.0, 1.0}, marg), -2.0 * kLn2, 1e-12);
}

TEST(JsdEstimate, EmptyMarginalIsNeutral) {
  Rng rng(1);
  JsdNet net(2, 2, rng);
  EXPECT_EQ(JsdEstimate(net, Vector{0.5, 0.5}, Vector{0.0, 1.0}, Matrix(0, 2)), 0.0);
}

TEST(JsdEstimate, PerfectDiscriminatorNearZero) {
  Rng rng(1);
  JsdNet net(1, 1, rng);
  WireScoreToFirstAction(net);
  const double est = JsdEstimate(net, Vector{0.0}, Vector{10.0}, FromRows({{-10}, {-10}}));
  EXPECT_NEAR(est, -2.0 * nn::Softplus(-10.0), 1e-15);
  EXPECT_NEAR(est, -9.08e-5, 1e-7);
}

TEST(JsdEstimate, SoftplusIdentity) {
  Rng rng(9);
  JsdNet net(3, 2, rng);
  Rng data(10);
  for (int trial = 0; trial < 20; ++trial) {
    Vector m(3), a(2);
    Matrix marg(7, 2);
    for (double& v : m) v = UniformReal(data, -2, 2);
    for (double& v : a) v = UniformReal(data, -1, 1);
    for (double& v : marg.values()) v = UniformReal(data, -1, 1);
    const double t = net.Score(m, a);
    double tail = 0.0;
    for (std::size_t r = 0; r < marg.rows(); ++r) tail += nn::Softplus(net.Score(m, marg.row(r)));
    const double other = t - nn::Softplus(t) - tail / 7.0;
    EXPECT_NEAR(JsdEstimate(net, m, a, marg), other, 1e-12);
  }
}

TEST(ClubLoss, ExactFitGivesLn2Pi) {
  Rng rng(1);
  ClubNet net(2, 2, rng);
  const Matrix m = FromRows({{0.4, -0.1}, {1.0, 2.0}, {0.0, 0.0}});
  Matrix a(3, 2);
  for (std::size_t r = 0; r < 3; ++r) {
    const Vector mu = net.Mean(m.row(r));
    a(r, 0) = mu[0];
    a(r, 1) = mu[1];
  }
  EXPECT_NEAR(ClubLoss(net, m, a, nullptr), kLn2Pi, 1e-12);
  EXPECT_NEAR(kLn2Pi, 1.83788, 1e-5);
}

TEST(ClubLoss, ConstantZeroMean) {
  Rng rng(1);
  ClubNet net(3, 2, rng);
  Zero(net.mean);
  EXPECT_NEAR(ClubLoss(net, FromRows({{1, 2, 3}}), FromRows({{1, 0}}), nullptr), 0.5 + kLn2Pi,
              1e-12);
}

TEST(ClubLoss, DecreasesOnPredictableBatch) {
  Rng rng(4);
  ClubNet net(2, 2, rng, 1e-3);
  Rng data(5);
  Matrix m(64, 2), a(64, 2);
  for (std::size_t r = 0; r < 64; ++r) {
    m(r, 0) = UniformReal(data, -1, 1);
    m(r, 1) = UniformReal(data, -1, 1);
    a(r, 0) = 0.5 * m(r, 0) - 0.2 * m(r, 1);
    a(r, 1) = 0.3 * m(r, 1);
  }
  std::vector<double> losses;
  for (int s = 0; s < 100; ++s) {
    Vector g;
    losses.push_back(ClubLoss(net, m, a, &g));
    net.adam.Step(net.mean.mutable_parameters(), g);
  }
  std::vector<double> smooth;
  for (std::size_t i = 0; i + 5 <= losses.size(); ++i) {
    double s = 0.0;
    for (std::size_t k = i; k < i + 5; ++k) s += losses[k];
    smooth.push_back(s / 5.0);
  }
  for (std::size_t i = 1; i < smooth.size(); ++i) EXPECT_LT(smooth[i], smooth[i - 1]) << i;
}

TEST(ClubEstimate, ConstantMeanCancels) {
  Rng rng(1);
  ClubNet net(2, 2, rng);
  Zero(net.mean);
  net.mean.mutable_bias(1)[0] = 0.3;
  const Vector a{0.7, -0.2};
  EXPECT_EQ(ClubEstimate(net, Vector{1.0, 2.0}, a, FromRows({{0.7, -0.2}})), 0.0);
  EXPECT_EQ(ClubEstimate(net, Vector{-3.0, 0.5}, a, FromRows({{0.7, -0.2}, {0.7, -0.2}})), 0.0);
}

TEST(ClubEstimate, FitMeanBeatsFarMarginal) {
  Rng rng(1);
  ClubNet net(2, 2, rng);
  const Vector m{0.3, -0.4};
  const Vector mu = net.Mean(m);
  EXPECT_GT(ClubEstimate(net, m, mu, FromRows({{3, 3}, {-3, 2}})), 0.0);
  EXPECT_EQ(ClubEstimate(net, m, mu, Matrix(0, 2)), 0.0);
}

TEST(CcLossStep, VisitsEveryOrderedPair) {
  Rng rng(1);
  JsdNet jsd(2, 2, rng);
  ClubNet club(2, 2, rng);
  PairBuffers bufs(3, 100);
  const CcLossResult r = CcLossStep(jsd, club, bufs, 16, rng);
  EXPECT_EQ(r.pairs_visited, 6u);
  EXPECT_EQ(r.total(), 0.0);
}

TEST(CcLossStep, EmptyBuffersLeaveParametersUnchanged) {
  Rng rng(1);
  JsdNet jsd(2, 2, rng);
  ClubNet club(2, 2, rng);
  const auto jh = jsd.ParameterHash(), ch = club.ParameterHash();
  PairBuffers bufs(3, 100);
  CcLossStep(jsd, club, bufs, 16, rng);
  EXPECT_EQ(jsd.ParameterHash(), jh);
  EXPECT_EQ(club.ParameterHash(), ch);
}

TEST(CcLossStep, LosslessOnlyTrainsJsd) {
  Rng rng(1);
  JsdNet jsd(2, 2, rng);
  ClubNet club(2, 2, rng);
  const auto jh = jsd.ParameterHash(), ch = club.ParameterHash();
  PairBuffers bufs(3, 100);
  Rng data(2);
  for (int k = 0; k < 20; ++k) {
    bufs.at(0, 1).Push({UniformReal(data, -1, 1), 0.5}, {UniformReal(data, -1, 1), 0.1}, 1);
  }
  const CcLossResult r = CcLossStep(jsd, club, bufs, 16, rng);
  EXPECT_EQ(r.jsd_pairs, 1u);
  EXPECT_EQ(r.club_pairs, 0u);
  EXPECT_GT(r.jsd_loss, 0.0);
  EXPECT_NE(jsd.ParameterHash(), jh);
  EXPECT_EQ(club.ParameterHash(), ch);
}

TEST(CcLossStep, LossyOnlyTrainsClub) {
  Rng rng(1);
  JsdNet jsd(2, 2, rng);
  ClubNet club(2, 2, rng);
  const auto jh = jsd.ParameterHash(), ch = club.ParameterHash();
  PairBuffers bufs(3, 100);
  for (int k = 0; k < 20; ++k) bufs.at(2, 0).Push({0.1 * k, 0.5}, {0.3, 0.1}, 0);
  const CcLossResult r = CcLossStep(jsd, club, bufs, 16, rng);
  EXPECT_EQ(r.club_pairs, 1u);
  EXPECT_EQ(jsd.ParameterHash(), jh);
  EXPECT_NE(club.ParameterHash(), ch);
}

TEST(Shaping, WorkedExample) {
  channel::LinkStatus links(2, true);
  links.Set(1, 0, false);
  std::vector<double> jsd(4, 0.0), club(4, 0.0);
  jsd[0 * 2 + 1] = -1.0;
  club[1 * 2 + 0] = 0.5;
  EXPECT_NEAR(CombineShaping(1.0, links, jsd, club, {0.01, 0.001}), 0.9895, 1e-15);
}

TEST(Shaping, AllDeliveredIgnoresClub) {
  channel::LinkStatus links(3, true);
  std::vector<double> jsd(9, 0.25), club(9, 100.0);
  EXPECT_DOUBLE_EQ(CombineShaping(0.0, links, jsd, club, {0.0, 5.0}), 0.0);
  EXPECT_DOUBLE_EQ(CombineShaping(0.0, links, jsd, club, {1.0, 5.0}), 6 * 0.25);
}

struct ShapingFixture {
  Rng init{11};
  DuMie dumie;
  Matrix sent{3, 2};
  Matrix actions{3, 2};
  channel::LinkStatus links{3, true};

  explicit ShapingFixture(ShapingCoefficients c)
      : dumie(3, DuMieConfig{.msg_dim = 2, .act_dim = 2, .coeffs = c}, init) {
    Rng data(12);
    links.Set(0, 2, false);
    links.Set(2, 1, false);
    for (int k = 0; k < 50; ++k) {
      Matrix m(3, 2), a(3, 2);
      for (double& v : m.values()) v = UniformReal(data, -1, 1);
      for (double& v : a.values()) v = UniformReal(data, -1, 1);
      dumie.Record(m, a, links);
    }
    for (double& v : sent.values()) v = UniformReal(data, -1, 1);
    for (double& v : actions.values()) v = UniformReal(data, -1, 1);
  }

  double Shape(double r) {
    Rng rng(13);
    return dumie.Shape(r, sent, actions, links, rng);
  }
};

TEST(Shaping, ZeroCoefficientsReturnRewardExactly) {
  ShapingFixture f({0.0, 0.0});
  EXPECT_FALSE(f.dumie.active());
  for (double r : {-1.2345678901234567, 0.1, 42.0}) EXPECT_EQ(f.Shape(r), r);
}

TEST(Shaping, HomogeneousInCoefficients) {
  ShapingFixture one({0.01, 0.02});
  ShapingFixture two({0.02, 0.04});
  const double r = -3.5;
  const double d1 = one.Shape(r) - r;
  const double d2 = two.Shape(r) - r;
  EXPECT_NE(d1, 0.0);
  EXPECT_NEAR(d2, 2.0 * d1, 1e-12);
}

TEST(DuMie, InactiveRecordsNothing) {
  Rng rng(1);
  DuMie d(3, DuMieConfig{}, rng);
  d.Record(Matrix(3, 8), Matrix(3, 2), channel::LinkStatus(3, true));
  EXPECT_TRUE(d.buffers().at(0, 1).lossless().empty());
  EXPECT_EQ(d.Update(rng).pairs_visited, 0u);
}

TEST(DuMie, RecordsEveryOrderedPair) {
  Rng rng(1);
  DuMie d(3, DuMieConfig{.coeffs = {0.01, 0.01}}, rng);
  channel::LinkStatus links(3, true);
  links.Set(1, 2, false);
  d.Record(Matrix(3, 8), Matrix(3, 2), links);
  for (std::size_t j = 0; j < 3; ++j) {
    for (std::size_t i = 0; i < 3; ++i) {
      if (i == j) continue;
      const auto& b = d.buffers().at(j, i);
      EXPECT_EQ(b.lossless().size() + b.lossy().size(), 1u);
    }
  }
  EXPECT_EQ(d.buffers().at(1, 2).lossy().size(), 1u);
}

TEST(SyntheticMi, ClosedForm) {
  EXPECT_EQ(testing::GaussianMi(0.0), 0.0);
  EXPECT_NEAR(testing::GaussianMi(0.5), 0.1438, 1e-4);
  EXPECT_NEAR(testing::GaussianMi(0.9), 0.8304, 1e-4);
}

TEST(SyntheticMi, StrongCorrelationIsDetected) {
  const testing::MiTrialResult r = testing::RunMiTrial(0.9, 21, {.steps = 1000});
  EXPECT_GE(r.club, testing::GaussianMi(0.9) - 0.1);
  EXPECT_GT(r.jsd, -2.0 * kLn2 + 0.1);
}

}  // namespace
}  // namespace ccmarl::dumie
