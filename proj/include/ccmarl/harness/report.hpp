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
#include <string>
#include <vector>

namespace ccmarl::harness {

struct EvalReport {
  std::string cell;
  std::string scenario;
  std::size_t n_agents = 0;
  std::string algorithm;  // table label
  std::string train_channel;
  std::string eval_channel;
  std::uint64_t seed = 0;
  double mean = 0.0;
  double std = 0.0;
  std::size_t n_episodes = 0;
  double seconds = 0.0;
  double alpha = 0.0;
  double beta = 0.0;
};

// Parses one eval.csv (header included).
std::vector<EvalReport> ReadEvalCsv(std::istream& in, const std::string& cell);

// Every <dir>/<cell>/seed_*/eval.csv, ordered by cell, seed, then file order.
std::vector<EvalReport> CollectReports(const std::filesystem::path& results_dir);

// scenario,n_agents,algorithm,train_channel,eval_channel,seed,mean,std
void WriteResultsCsv(std::ostream& out, const std::vector<EvalReport>& reports);

// "134.7±89.9"
std::string FormatMeanStd(double mean, double std);

// One block per (scenario, n_agents): rows are eval channels, columns are
// algorithm labels, each cell the seed-averaged mean±std (a dash placeholder when absent).
std::string PivotTable(const std::vector<EvalReport>& reports);

// Writes results.csv and table.txt into results_dir; returns the table.
std::string WriteReport(const std::filesystem::path& results_dir);

// Trailing-window average in valid mode with window min(window, n): a series
// shorter than the window collapses to one point.
std::vector<double> MovingAverage(const std::vector<double>& values, std::size_t window);

struct PlotDataSummary {
  std::size_t curves = 0;
  std::size_t skipped = 0;
  std::size_t ablation_rows = 0;
};

// <dir>/plots/curves/<cell>_seed<s>.csv (step,return) smoothed with window 10,
// and <dir>/plots/ablation.csv keyed by (alpha, beta) within each
// (scenario, n_agents, train_channel) group.
PlotDataSummary EmitPlotData(const std::filesystem::path& results_dir, std::ostream* warnings);

}  // namespace ccmarl::harness
