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

#include <filesystem>
#include <iosfwd>

#include "ccmarl/nn/mlp.hpp"

namespace ccmarl::nn {

// Text checkpoint layout, one token group per line:
//
//   ccmarl-mlp 1
//   layers <L>
//   then per layer l = 0..L-1:
//     layer <in> <out> <relu|tanh|identity>
//     <out> lines of <in> weights (row-major, row o holds the weights into unit o)
//     1 line of <out> biases
//
// Values are written with 17 significant digits, so a save/load round trip
// reproduces every parameter bit-for-bit.
void SaveMlp(const Mlp& net, std::ostream& out);
Mlp LoadMlp(std::istream& in);

void SaveMlpFile(const Mlp& net, const std::filesystem::path& path);
Mlp LoadMlpFile(const std::filesystem::path& path);

}  // namespace ccmarl::nn
