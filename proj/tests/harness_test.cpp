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

#include <filesystem>
#include <fstream>
#include <sstream>
#include <string>

#include <gtest/gtest.h>

#include "json.hpp"
#include "ccmarl/harness/config.hpp"
#include "ccmarl/harness/grid.hpp"
#include "ccmarl/harness/report.hpp"

namespace ccmarl::harness {
namespace {

namespace fs = std::filesystem;
using nlohmann::json;

fs::path FreshDir(const std::string& name) {
  const fs::path dir = fs::temp_directory_path() / ("ccmarl_" + name);
  fs::remove_all(dir);
  fs::create_directories(dir);
  return dir;
}

std::string Slurp(const fs::path& p) {
  std::ifstream in(p, std::ios::binary);
  std::ostringstream s;
  s << in.rdbuf();
  return s.str();
}

std::size_t Lines(const std::string& text) {
  std::size_t n = 0;
  for (char c : text) n += c == '\n';
  return n;
}

// Smallest run that still performs one update round.
const char* kTinyTrain = R"("train": {"total_steps": 1100, "warmup": 1024, "batch_size": 256, "hidden": 8})";

TEST(Config, MinimalGetsDefaults) {
  const ExperimentSpec spec = ParseConfig(R"({"scenario": "spread"})");
  ASSERT_EQ(spec.cells.size(), 1u);
  const CellSpec& c = spec.cells[0];
  EXPECT_EQ(c.algorithm, "cc");
  EXPECT_EQ(c.train.gamma, 0.95);
  EXPECT_EQ(c.train.tau, 0.01);
  EXPECT_EQ(c.train.actor_lr, 1e-4);
  EXPECT_EQ(c.train.critic_lr, 1e-3);
  EXPECT_EQ(c.train.batch_size, 1024u);
  EXPECT_EQ(c.train.buffer_capacity, 100000u);
  EXPECT_EQ(c.train.total_steps, 200000u);
  EXPECT_EQ(c.train.update_every, 100u);
  EXPECT_EQ(c.train.env.n_agents, 3u);
  EXPECT_EQ(c.seeds, std::vector<std::uint64_t>{1});
  EXPECT_EQ(c.eval_episodes, 100u);
  EXPECT_EQ(c.eval_channels.size(), 7u);
  EXPECT_EQ(c.train.dumie.coeffs.alpha, 0.01);
  EXPECT_EQ(c.train.dumie.coeffs.beta, 0.01);
  EXPECT_EQ(channel::Describe(c.train.train_channel), "dropout-0.2");
}

TEST(Config, TagCoefficientsAndLargeTeams) {
  const auto tag = ParseConfig(R"({"scenario": "tag", "n_agents": 6})").cells[0];
  EXPECT_EQ(tag.train.dumie.coeffs.beta, 0.001);
  EXPECT_EQ(tag.train.batch_size, 512u);
}

TEST(Config, MbcKindSelectsMediumLevel) {
  const auto c =
      ParseConfig(R"({"scenario": "spread", "algorithm": "fc", "channel": {"kind": "mbc", "k": 6}})")
          .cells[0];
  EXPECT_EQ(channel::Describe(c.train.train_channel), "mbc-6");
  EXPECT_NEAR(channel::StationaryLossRate(std::get<channel::MarkovChain>(c.train.train_channel)), 5.0 / 6.0, 1e-9);
}

TEST(Config, ChannelLabel) {
  const auto c = ParseConfig(R"({"scenario": "spread", "channel": {"label": "heavy-dbc"}})").cells[0];
  EXPECT_EQ(channel::Describe(c.train.train_channel), channel::Describe(channel::ParseChannel("heavy-dbc")));
}

TEST(Config, UnknownKeyIsNamed) {
  try {
    ParseConfig(R"({"scenario": "spread", "train": {"gama": 0.9}})");
    FAIL() << "expected ConfigError";
  } catch (const ConfigError& e) {
    EXPECT_NE(std::string(e.what()).find("train.gama"), std::string::npos) << e.what();
  }
  EXPECT_THROW(ParseConfig(R"({"scenario": "spread", "colour": 1})"), ConfigError);
}

TEST(Config, TypeErrorNamesKeyAndType) {
  try {
    ParseConfig(R"({"scenario": "spread", "train": {"gamma": "high"}})");
    FAIL() << "expected ConfigError";
  } catch (const ConfigError& e) {
    const std::string msg = e.what();
    EXPECT_NE(msg.find("train.gamma"), std::string::npos) << msg;
    EXPECT_NE(msg.find("number"), std::string::npos) << msg;
  }
}

TEST(Config, RejectsBadValues) {
  EXPECT_THROW(ParseConfig(R"({"n_agents": 3})"), ConfigError);
  EXPECT_THROW(ParseConfig(R"({"scenario": "spread", "algorithm": "magic"})"), ConfigError);
  EXPECT_THROW(ParseConfig(R"({"scenario": "spread", "seeds": [1, 1]})"), ConfigError);
  EXPECT_THROW(ParseConfig(R"({"scenario": "spread", "eval": {"channels": ["fog"]}})"), ConfigError);
  EXPECT_THROW(ParseConfig(R"({"scenario": "spread", "train": {"gamma": 1.5}})"), ConfigError);
  EXPECT_THROW(ParseConfig("{not json"), ConfigError);
}

TEST(Config, CellsOverrideSharedKeys) {
  const auto spec = ParseConfig(R"({
    "scenario": "spread", "seeds": [1, 2], "out": "somewhere",
    "cells": [{"algorithm": "fc"}, {"algorithm": "nocomm", "seeds": [3]}]})");
  ASSERT_EQ(spec.cells.size(), 2u);
  EXPECT_EQ(spec.out, "somewhere");
  EXPECT_EQ(spec.cells[0].seeds, (std::vector<std::uint64_t>{1, 2}));
  EXPECT_EQ(spec.cells[1].seeds, std::vector<std::uint64_t>{3});
  EXPECT_NE(spec.cells[0].name, spec.cells[1].name);
  EXPECT_THROW(ParseConfig(R"({"scenario": "spread", "cells": [{"algorithm": "fc"}, {"algorithm": "fc"}]})"),
               ConfigError);
}

TEST(Config, PaperScale) {
  ExperimentSpec spec = ParseConfig(R"({"scenario": "spread"})");
  ApplyPaperScale(spec);
  EXPECT_EQ(spec.cells[0].train.total_steps, kPaperScaleSteps);
}

// The presets may only differ in training channel and shaping coefficients.
TEST(Config, PresetsDifferOnlyInChannelAndCoefficients) {
  auto dump = [](const std::string& algo) {
    json j = json::parse(DumpCell(ParseConfig(R"({"scenario": "spread", "algorithm": ")" + algo +
                                              R"("})")
                                      .cells[0]));
    j.erase("name");
    j.erase("algorithm");
    j.erase("label");
    return j;
  };
  const json base = dump("fc");
  for (const std::string algo : {"nocomm", "cc", "dropout-0.5"}) {
    const json diff = json::diff(base, dump(algo));
    for (const auto& op : diff) {
      const std::string path = op["path"];
      const bool allowed = path.starts_with("/channel") || path.starts_with("/shaping/alpha") ||
                           path.starts_with("/shaping/beta");
      EXPECT_TRUE(allowed) << algo << " differs at " << path;
    }
  }
}

TEST(Config, DumpRoundTrips) {
  const auto cell = ParseConfig(R"({"scenario": "reference", "algorithm": "dropout-0.5",
                                    "shaping": {"alpha": 0.02}})")
                        .cells[0];
  const auto again = ResolveCell(DumpCell(cell));
  EXPECT_EQ(DumpCell(again), DumpCell(cell));
}

TEST(Config, MatrixFileIsResolvedAgainstConfigDir) {
  const fs::path dir = FreshDir("mbc_cfg");
  std::ofstream(dir / "chain.txt") << "2\n0.5 0.5\n0.25 0.75\n";
  std::ofstream(dir / "exp.json")
      << R"({"scenario": "spread", "channel": {"kind": "mbc", "matrix_file": "chain.txt"}})";
  const auto spec = LoadConfig(dir / "exp.json");
  EXPECT_NEAR(channel::StationaryLossRate(std::get<channel::MarkovChain>(spec.cells[0].train.train_channel)), 2.0 / 3.0, 1e-9);
}

TEST(Report, FormatMeanStd) {
  EXPECT_EQ(FormatMeanStd(134.71, 89.94), "134.7±89.9");
  EXPECT_EQ(FormatMeanStd(-129.44, 3.0), "-129.4±3.0");
}

EvalReport Row(const std::string& algo, const std::string& eval, std::uint64_t seed, double mean) {
  EvalReport r;
  r.cell = algo;
  r.scenario = "spread";
  r.n_agents = 3;
  r.algorithm = algo;
  r.train_channel = "dropout-0.2";
  r.eval_channel = eval;
  r.seed = seed;
  r.mean = mean;
  r.std = 1.0;
  r.n_episodes = 100;
  return r;
}

TEST(Report, SingleReportOneRow) {
  std::ostringstream out;
  WriteResultsCsv(out, {Row("cc", "unrestricted", 1, -50.0)});
  EXPECT_EQ(out.str(),
            "scenario,n_agents,algorithm,train_channel,eval_channel,seed,mean,std\n"
            "spread,3,cc,dropout-0.2,unrestricted,1,-50,1\n");
}

TEST(Report, PivotAveragesSeedsAndMarksGaps) {
  const std::string table = PivotTable({Row("cc", "unrestricted", 1, -40.0),
                                        Row("cc", "unrestricted", 2, -60.0),
                                        Row("nocomm", "medium-dbc", 1, -70.0)});
  EXPECT_NE(table.find("spread (N=3)"), std::string::npos);
  EXPECT_NE(table.find("-50.0±1.0"), std::string::npos) << table;
  EXPECT_NE(table.find("—"), std::string::npos) << table;
  EXPECT_LT(table.find("unrestricted"), table.find("medium-dbc"));
}

TEST(Report, MovingAverage) {
  EXPECT_EQ(MovingAverage({1, 2, 3, 4}, 2), (std::vector<double>{1.5, 2.5, 3.5}));
  EXPECT_EQ(MovingAverage({1, 2, 3}, 10), std::vector<double>{2.0});
  EXPECT_TRUE(MovingAverage({}, 10).empty());
}

void WriteEval(const fs::path& root, const std::string& cell, std::uint64_t seed, double alpha,
               double beta, const std::vector<std::string>& channels) {
  const fs::path dir = root / cell / ("seed_" + std::to_string(seed));
  fs::create_directories(dir);
  std::ofstream out(dir / "eval.csv");
  WriteEvalHeader(out);
  for (const auto& ch : channels) {
    out << "spread,3,cc,dropout-0.2," << ch << ',' << seed << ",-50,2,100,0.1," << alpha << ','
        << beta << '\n';
  }
}

TEST(PlotData, AblationGridHasOneRowPerCoefficientAndChannel) {
  const fs::path root = FreshDir("ablation");
  const auto channels = channel::StandardEvalChannels();
  const double coeffs[4][2] = {{0.01, 0.01}, {0.01, 0}, {0, 0.01}, {0, 0}};
  for (int k = 0; k < 4; ++k) {
    for (std::uint64_t seed : {1, 2}) {
      WriteEval(root, "cell" + std::to_string(k), seed, coeffs[k][0], coeffs[k][1], channels);
    }
  }
  std::ostringstream warn;
  const PlotDataSummary s = EmitPlotData(root, &warn);
  EXPECT_EQ(s.ablation_rows, 28u);
  const std::string csv = Slurp(root / "plots" / "ablation.csv");
  EXPECT_EQ(Lines(csv), 29u);
  EXPECT_NE(csv.find(",2\n"), std::string::npos);  // two seeds per row
  EXPECT_EQ(s.skipped, 8u);  // no metrics.csv anywhere
}

TEST(PlotData, CurvesAreSmoothedAndEmptyMetricsSkipped) {
  const fs::path root = FreshDir("curves");
  fs::create_directories(root / "a" / "seed_1");
  fs::create_directories(root / "b" / "seed_1");
  {
    std::ofstream m(root / "a" / "seed_1" / "metrics.csv");
    m << "step,episode,return,td_loss,policy_loss,jsd_loss,club_loss,noise_scale\n";
    for (int k = 1; k <= 12; ++k) m << k * 100 << ",0," << k << ",0,0,0,0,0\n";
  }
  std::ofstream(root / "b" / "seed_1" / "metrics.csv") << "";
  std::ostringstream warn;
  const PlotDataSummary s = EmitPlotData(root, &warn);
  EXPECT_EQ(s.curves, 1u);
  EXPECT_EQ(s.skipped, 1u);
  EXPECT_NE(warn.str().find("warning"), std::string::npos);
  const std::string curve = Slurp(root / "plots" / "curves" / "a_seed1.csv");
  EXPECT_EQ(curve, "step,return\n1000,5.5\n1100,6.5\n1200,7.5\n");
}

TEST(Grid, OneCellSevenChannelsAndResume) {
  const fs::path root = FreshDir("grid");
  const std::string cfg = std::string(R"({"scenario": "spread", "algorithm": "cc", "eval": {"episodes": 2}, )") +
                          kTinyTrain + R"(, "out": ")" + root.string() + R"("})";
  const ExperimentSpec spec = ParseConfig(cfg);
  std::ostringstream log;
  const GridSummary first = RunGrid(spec, {.parallel = 1, .log = &log});
  EXPECT_EQ(first.trained, 1u);
  EXPECT_TRUE(first.failures.empty());
  const auto reports = CollectReports(root);
  ASSERT_EQ(reports.size(), 7u);
  for (const auto& r : reports) EXPECT_EQ(r.n_episodes, 2u);

  const fs::path eval = SeedDir(root, spec.cells[0], 1) / "eval.csv";
  const auto stamp = fs::last_write_time(eval);
  const std::string before = Slurp(eval);
  const GridSummary second = RunGrid(spec, {.parallel = 1, .log = &log});
  EXPECT_EQ(second.trained, 0u);
  EXPECT_EQ(second.skipped, 1u);
  EXPECT_EQ(fs::last_write_time(eval), stamp);

  // An identical spec reproduces the same results byte for byte.
  fs::remove_all(SeedDir(root, spec.cells[0], 1));
  RunGrid(spec, {.parallel = 1, .log = &log});
  std::string after = Slurp(eval);
  auto strip_seconds = [](const std::string& text) {
    std::istringstream in(text);
    std::string line, out;
    while (std::getline(in, line)) {
      std::vector<std::string> f;
      std::stringstream ls(line);
      for (std::string x; std::getline(ls, x, ',');) f.push_back(x);
      f[9] = "";
      for (const auto& x : f) out += x + ",";
      out += "\n";
    }
    return out;
  };
  EXPECT_EQ(strip_seconds(after), strip_seconds(before));

  const std::string table = WriteReport(root);
  EXPECT_TRUE(fs::exists(root / "results.csv"));
  EXPECT_EQ(Lines(Slurp(root / "results.csv")), 8u);
  EXPECT_NE(table.find("heavy-dbc"), std::string::npos);
}

TEST(Grid, FailedRunIsRecordedAndOthersContinue) {
  const fs::path root = FreshDir("grid_fail");
  const std::string cfg = std::string(R"({"scenario": "spread", "eval": {"episodes": 1, "channels": ["unrestricted"]}, )") +
                          kTinyTrain + R"(, "out": ")" + root.string() +
                          R"(", "cells": [{"algorithm": "fc"}, {"algorithm": "nocomm"}]})";
  ExperimentSpec spec = ParseConfig(cfg);
  // Make the first cell's checkpoint directory unwritable by occupying its path with a file.
  fs::create_directories(SeedDir(root, spec.cells[0], 1));
  std::ofstream(SeedDir(root, spec.cells[0], 1) / "checkpoint") << "x";
  std::ostringstream log;
  const GridSummary s = RunGrid(spec, {.parallel = 2, .log = &log});
  EXPECT_EQ(s.failures.size(), 1u);
  EXPECT_EQ(s.trained, 1u);
  EXPECT_TRUE(fs::exists(SeedDir(root, spec.cells[0], 1) / "FAILED"));
  EXPECT_TRUE(fs::exists(SeedDir(root, spec.cells[1], 1) / "eval.csv"));
}

TEST(Grid, EvaluateCheckpointMatchesRun) {
  const fs::path root = FreshDir("grid_eval");
  const std::string cfg = std::string(R"({"scenario": "spread", "algorithm": "fc", "eval": {"episodes": 3, "channels": ["light-mbc"]}, )") +
                          kTinyTrain + R"(, "out": ")" + root.string() + R"("})";
  const ExperimentSpec spec = ParseConfig(cfg);
  RunGrid(spec);
  const fs::path dir = SeedDir(root, spec.cells[0], 1);
  std::ostringstream csv;
  WriteEvalHeader(csv);
  EvaluateCheckpoint(spec.cells[0], 1, dir / "checkpoint", {"light-mbc"}, csv, nullptr);
  std::istringstream a(csv.str()), b(Slurp(dir / "eval.csv"));
  const auto x = ReadEvalCsv(a, "c"), y = ReadEvalCsv(b, "c");
  ASSERT_EQ(x.size(), 1u);
  ASSERT_EQ(y.size(), 1u);
  EXPECT_EQ(x[0].mean, y[0].mean);
  EXPECT_EQ(x[0].std, y[0].std);
}

}  // namespace
}  // namespace ccmarl::harness
