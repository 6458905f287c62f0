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

#include "ccmarl/nn/checkpoint.hpp"

#include <fstream>
#include <iomanip>
#include <istream>
#include <ostream>
#include <stdexcept>
#include <string>

namespace ccmarl::nn {

void SaveMlp(const Mlp& net, std::ostream& out) {
  out << "ccmarl-mlp 1\n";
  out << "layers " << net.num_layers() << "\n";
  out << std::setprecision(17);
  for (std::size_t l = 0; l < net.num_layers(); ++l) {
    const LayerSpec& spec = net.layer(l);
    out << "layer " << spec.in << ' ' << spec.out << ' ' << ActivationName(spec.activation)
        << "\n";
    const auto w = net.weights(l);
    for (std::size_t o = 0; o < spec.out; ++o) {
      for (std::size_t i = 0; i < spec.in; ++i) {
        out << (i == 0 ? "" : " ") << w[o * spec.in + i];
      }
      out << "\n";
    }
    const auto b = net.bias(l);
    for (std::size_t o = 0; o < spec.out; ++o) out << (o == 0 ? "" : " ") << b[o];
    out << "\n";
  }
}

Mlp LoadMlp(std::istream& in) {
  std::string tag;
  int version = 0;
  if (!(in >> tag >> version) || tag != "ccmarl-mlp" || version != 1) {
    throw std::runtime_error("checkpoint: bad header");
  }
  std::size_t num_layers = 0;
  if (!(in >> tag >> num_layers) || tag != "layers" || num_layers == 0) {
    throw std::runtime_error("checkpoint: bad layer count");
  }
  std::vector<LayerSpec> specs;
  std::vector<Vector> blocks;
  for (std::size_t l = 0; l < num_layers; ++l) {
    LayerSpec spec;
    std::string act;
    if (!(in >> tag >> spec.in >> spec.out >> act) || tag != "layer") {
      throw std::runtime_error("checkpoint: bad header for layer " + std::to_string(l));
    }
    spec.activation = ParseActivation(act);
    Vector block(spec.in * spec.out + spec.out);
    for (double& v : block) {
      if (!(in >> v)) throw std::runtime_error("checkpoint: truncated layer " + std::to_string(l));
    }
    specs.push_back(spec);
    blocks.push_back(std::move(block));
  }
  Mlp net(specs);
  auto params = net.mutable_parameters();
  std::size_t offset = 0;
  for (const Vector& block : blocks) {
    std::copy(block.begin(), block.end(), params.begin() + static_cast<std::ptrdiff_t>(offset));
    offset += block.size();
  }
  if (!AllFinite(params)) throw std::runtime_error("checkpoint: non-finite parameter");
  return net;
}

void SaveMlpFile(const Mlp& net, const std::filesystem::path& path) {
  std::ofstream out(path);
  if (!out) throw std::runtime_error("checkpoint: cannot write " + path.string());
  SaveMlp(net, out);
}

Mlp LoadMlpFile(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw std::runtime_error("checkpoint: cannot read " + path.string());
  return LoadMlp(in);
}

}  // namespace ccmarl::nn
