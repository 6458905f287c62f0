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

// Command-line front end: train, grid, eval, report, plotdata, config.

#include <cstdint>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <optional>
#include <string>

#include "CLI11.hpp"
#include "ccmarl/harness/config.hpp"
#include "ccmarl/harness/grid.hpp"
#include "ccmarl/harness/report.hpp"
#include "ccmarl/simd/kernels.hpp"

namespace fs = std::filesystem;
using namespace ccmarl;

namespace {

struct Common {
  std::string config;
  std::optional<std::uint64_t> seed;
  std::string out;
  bool paper_scale = false;
};

harness::ExperimentSpec Load(const Common& c) {
  harness::ExperimentSpec spec = harness::LoadConfig(c.config);
  if (!c.out.empty()) spec.out = c.out;
  if (c.paper_scale) harness::ApplyPaperScale(spec);
  if (c.seed) {
    for (auto& cell : spec.cells) cell.seeds = {*c.seed};
  }
  return spec;
}

const harness::CellSpec& PickCell(const harness::ExperimentSpec& spec, const std::string& name) {
  if (name.empty()) {
    if (spec.cells.size() != 1) {
      throw std::runtime_error("config has " + std::to_string(spec.cells.size()) +
                               " cells; choose one with --cell");
    }
    return spec.cells.front();
  }
  for (const auto& c : spec.cells) {
    if (c.name == name) return c;
  }
  throw std::runtime_error("no cell named '" + name + "'");
}

int Finish(const harness::GridSummary& s, const fs::path& out) {
  std::cout << harness::WriteReport(out);
  std::cerr << "trained " << s.trained << ", skipped " << s.skipped << ", failed "
            << s.failures.size() << "\n";
  for (const auto& f : s.failures) {
    std::cerr << "  " << f.cell << " seed " << f.seed << ": " << f.message << "\n";
  }
  return s.failures.empty() ? 0 : 1;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Communication-constrained multi-agent training with dual mutual-information shaping"};
  app.require_subcommand(1);

  Common common;
  auto add_common = [&](CLI::App* cmd, bool needs_config) {
    auto* opt = cmd->add_option("--config", common.config, "JSON experiment config");
    if (needs_config) opt->required()->check(CLI::ExistingFile);
    cmd->add_option("--seed", common.seed, "Override the seed list with one seed");
    cmd->add_option("--out", common.out, "Results directory");
    cmd->add_flag("--paper-scale", common.paper_scale, "Train for 4e6 steps per run");
  };

  std::string cell_name;
  auto* train = app.add_subcommand("train", "Train and evaluate one cell");
  add_common(train, true);
  train->add_option("--cell", cell_name, "Cell name when the config has several");

  std::size_t parallel = 1;
  auto* grid = app.add_subcommand("grid", "Run every cell and seed of a config");
  add_common(grid, true);
  grid->add_option("--parallel", parallel, "Concurrent training runs")->check(CLI::PositiveNumber);

  std::string checkpoint, channel_label;
  std::size_t episodes = 0;
  auto* eval = app.add_subcommand("eval", "Evaluate saved actors under one channel");
  add_common(eval, true);
  eval->add_option("--cell", cell_name, "Cell name when the config has several");
  eval->add_option("--checkpoint", checkpoint, "Directory with actor_<i>.txt")
      ->required()
      ->check(CLI::ExistingDirectory);
  eval->add_option("--channel", channel_label, "Evaluation channel label")->required();
  eval->add_option("--episodes", episodes, "Episodes (default from config)");

  auto* report = app.add_subcommand("report", "Write results.csv and the pivot table");
  add_common(report, false);
  auto* plot = app.add_subcommand("plotdata", "Write learning-curve and ablation CSVs");
  add_common(plot, false);

  auto* dump = app.add_subcommand("config", "Print the resolved configuration of every cell");
  add_common(dump, true);

  CLI11_PARSE(app, argc, argv);

  try {
    if (*train) {
      const auto spec = Load(common);
      const auto& cell = PickCell(spec, cell_name);
      std::cerr << "kernels: " << simd::Kernels().name << "\n";
      harness::GridSummary s;
      for (auto seed : cell.seeds) {
        const fs::path dir = harness::SeedDir(spec.out, cell, seed);
        try {
          harness::RunCellSeed(cell, seed, dir);
          ++s.trained;
        } catch (const std::exception& e) {
          std::ofstream(dir / "FAILED") << e.what() << '\n';
          s.failures.push_back({cell.name, seed, e.what()});
        }
      }
      return Finish(s, spec.out);
    }
    if (*grid) {
      const auto spec = Load(common);
      std::cerr << "kernels: " << simd::Kernels().name << "\n";
      const auto s = harness::RunGrid(spec, {.parallel = parallel, .log = &std::cerr});
      return Finish(s, spec.out);
    }
    if (*eval) {
      auto spec = Load(common);
      harness::CellSpec cell = PickCell(spec, cell_name);
      if (episodes > 0) cell.eval_episodes = episodes;
      const std::uint64_t seed = common.seed.value_or(cell.seeds.front());
      harness::WriteEvalHeader(std::cout);
      harness::EvaluateCheckpoint(cell, seed, checkpoint, {channel_label}, std::cout, nullptr);
      return 0;
    }
    const fs::path out = common.out.empty()
                             ? (common.config.empty() ? fs::path("results") : Load(common).out)
                             : fs::path(common.out);
    if (*report) {
      std::cout << harness::WriteReport(out);
      return 0;
    }
    if (*plot) {
      const auto s = harness::EmitPlotData(out, &std::cerr);
      std::cerr << s.curves << " curves, " << s.skipped << " skipped, " << s.ablation_rows
                << " ablation rows\n";
      return 0;
    }
    if (*dump) {
      for (const auto& c : Load(common).cells) std::cout << harness::DumpCell(c);
      return 0;
    }
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 2;
  }
  return 0;
}
