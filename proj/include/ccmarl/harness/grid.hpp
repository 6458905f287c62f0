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

#include "ccmarl/harness/config.hpp"

namespace ccmarl::harness {

struct GridOptions {
  std::size_t parallel = 1;
  std::ostream* log = nullptr;
};

struct CellFailure {
  std::string cell;
  std::uint64_t seed = 0;
  std::string message;
};

struct GridSummary {
  std::size_t trained = 0;
  std::size_t skipped = 0;  // already complete on disk
  std::vector<CellFailure> failures;
};

// <out>/<cell>/seed_<seed>
std::filesystem::path SeedDir(const std::filesystem::path& out, const CellSpec& cell,
                              std::uint64_t seed);

// Seed used for evaluation rollouts; shared by every eval channel of a run.
std::uint64_t EvalSeed(std::uint64_t seed);

// Trains one (cell, seed) and evaluates it under every listed channel. Writes
// config.json, metrics.csv, checkpoint/, episodes.csv and finally eval.csv,
// whose presence marks the run complete.
void RunCellSeed(const CellSpec& cell, std::uint64_t seed, const std::filesystem::path& dir);

// Evaluates saved actors; rows follow the eval.csv layout.
void EvaluateCheckpoint(const CellSpec& cell, std::uint64_t seed,
                        const std::filesystem::path& checkpoint_dir,
                        const std::vector<std::string>& channels, std::ostream& eval_csv,
                        std::ostream* episodes_csv);

void WriteEvalHeader(std::ostream& out);

// Runs every incomplete (cell, seed), at most opts.parallel at a time. A
// failing run is logged to <out>/<cell>/seed_<s>/FAILED and the rest continue.
GridSummary RunGrid(const ExperimentSpec& spec, const GridOptions& opts = {});

}  // namespace ccmarl::harness
