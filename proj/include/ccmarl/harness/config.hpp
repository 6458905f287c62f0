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

#include <cstdint>
#include <filesystem>
#include <stdexcept>
#include <string>
#include <string_view>
#include <vector>

#include "ccmarl/maddpg/trainer.hpp"

namespace ccmarl::harness {

class ConfigError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

// One trainable configuration, run once per seed.
struct CellSpec {
  std::string name;       // directory name, unique within a spec
  std::string algorithm;  // preset: fc, nocomm, cc, dropout-<p>
  std::string label;      // column label in tables (defaults to algorithm)
  maddpg::TrainConfig train;
  std::vector<std::string> eval_channels;
  std::size_t eval_episodes = 100;
  std::vector<std::uint64_t> seeds{1};
};

struct ExperimentSpec {
  std::string name = "experiment";
  std::filesystem::path out = "results";
  std::vector<CellSpec> cells;
};

inline constexpr std::size_t kPaperScaleSteps = 4000000;

// JSON text. Top-level keys are shared by every cell; a "cells" array adds
// per-cell overrides. Without "cells" the document is a single cell.
ExperimentSpec ParseConfig(std::string_view json_text, const std::filesystem::path& base_dir = {});
ExperimentSpec LoadConfig(const std::filesystem::path& path);

// Defaults < algorithm preset < explicit keys.
CellSpec ResolveCell(std::string_view json_object, const std::filesystem::path& base_dir = {});

void ApplyPaperScale(ExperimentSpec& spec);

// Fully resolved cell as pretty JSON (all defaults written out).
std::string DumpCell(const CellSpec& cell);

}  // namespace ccmarl::harness
