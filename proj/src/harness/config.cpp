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

#include "ccmarl/harness/config.hpp"

#include <cmath>
#include <cstdio>
#include <fstream>
#include <limits>
#include <set>
#include <sstream>

#include "json.hpp"

namespace ccmarl::harness {
namespace {

using nlohmann::json;

std::string TypeName(const json& v) {
  if (v.is_boolean()) return "boolean";
  if (v.is_number_integer() || v.is_number_unsigned()) return "integer";
  if (v.is_number()) return "number";
  if (v.is_string()) return "string";
  if (v.is_array()) return "array";
  if (v.is_object()) return "object";
  return "null";
}

[[noreturn]] void TypeError(const std::string& key, const char* expected, const json& got) {
  throw ConfigError("config: '" + key + "' expected " + expected + ", got " + TypeName(got));
}

// Reads typed keys from one JSON object and rejects anything left unread.
class Section {
 public:
  Section(const json& obj, std::string prefix) : obj_(obj), prefix_(std::move(prefix)) {
    if (!obj.is_object()) TypeError(prefix_.empty() ? "<root>" : prefix_, "object", obj);
  }

  bool Has(const std::string& key) const { return obj_.contains(key); }

  const json* Get(const std::string& key) {
    seen_.insert(key);
    auto it = obj_.find(key);
    return it == obj_.end() ? nullptr : &*it;
  }

  void Number(const std::string& key, double& out) {
    if (const json* v = Get(key)) {
      if (v->is_string() && v->get<std::string>() == "inf") {
        out = std::numeric_limits<double>::infinity();
        return;
      }
      if (!v->is_number()) TypeError(Path(key), "number", *v);
      out = v->get<double>();
    }
  }
  void Count(const std::string& key, std::size_t& out) {
    if (const json* v = Get(key)) {
      if (v->is_number_unsigned() || (v->is_number_integer() && v->get<std::int64_t>() >= 0)) {
        out = v->get<std::size_t>();
      } else if (v->is_number_float() && v->get<double>() >= 0 &&
                 std::floor(v->get<double>()) == v->get<double>()) {
        out = static_cast<std::size_t>(v->get<double>());
      } else {
        TypeError(Path(key), "non-negative integer", *v);
      }
    }
  }
  void Bool(const std::string& key, bool& out) {
    if (const json* v = Get(key)) {
      if (!v->is_boolean()) TypeError(Path(key), "boolean", *v);
      out = v->get<bool>();
    }
  }
  void String(const std::string& key, std::string& out) {
    if (const json* v = Get(key)) {
      if (!v->is_string()) TypeError(Path(key), "string", *v);
      out = v->get<std::string>();
    }
  }

  std::string Path(const std::string& key) const {
    return prefix_.empty() ? key : prefix_ + "." + key;
  }

  void RejectUnknown() const {
    for (auto it = obj_.begin(); it != obj_.end(); ++it) {
      if (!seen_.count(it.key())) throw ConfigError("config: unknown key '" + Path(it.key()) + "'");
    }
  }

 private:
  const json& obj_;
  std::string prefix_;
  std::set<std::string> seen_;
};

std::string FormatNumber(double v) {
  char buf[64];
  std::snprintf(buf, sizeof(buf), "%g", v);
  return buf;
}

void ApplyPreset(const std::string& algorithm, CellSpec& cell) {
  auto& t = cell.train;
  t.dumie.coeffs = {};
  if (algorithm == "fc") {
    t.train_channel = channel::Unrestricted{};
  } else if (algorithm == "nocomm") {
    t.train_channel = channel::Dropout{1.0};
  } else if (algorithm == "cc") {
    t.train_channel = channel::Dropout{0.2};
    if (t.env.scenario == env::Scenario::kTag) {
      t.dumie.coeffs = {0.01, 0.001};
    } else {
      t.dumie.coeffs = {0.01, 0.01};
    }
  } else if (algorithm.starts_with("dropout-")) {
    try {
      t.train_channel = channel::ParseChannel(algorithm);
    } catch (const std::exception& e) {
      throw ConfigError("config: 'algorithm' " + std::string(e.what()));
    }
  } else {
    throw ConfigError("config: 'algorithm' must be one of fc, nocomm, cc, dropout-<p>; got '" +
                      algorithm + "'");
  }
}

channel::ChannelModel ReadChannel(Section& s, const std::filesystem::path& base_dir) {
  std::string kind, label, matrix_file;
  double p = 0.0, d = 0.0;
  std::size_t k = 0;
  bool shared = false;
  s.String("kind", kind);
  s.String("label", label);
  s.Number("p", p);
  s.Number("d", d);
  s.Count("k", k);
  s.Bool("shared", shared);
  s.String("matrix_file", matrix_file);
  s.RejectUnknown();
  try {
    if (!label.empty()) {
      if (!kind.empty()) throw ConfigError("config: channel.label and channel.kind are exclusive");
      return channel::ParseChannel(label);
    }
    if (kind == "unrestricted") return channel::Unrestricted{};
    if (kind == "dropout") {
      channel::ChannelModel m = channel::Dropout{p};
      channel::Validate(m);
      return m;
    }
    if (kind == "mbc") {
      channel::MarkovChain m;
      if (!matrix_file.empty()) {
        std::filesystem::path path(matrix_file);
        if (path.is_relative() && !base_dir.empty()) path = base_dir / path;
        m = channel::LoadMbcMatrixFile(path);
      } else {
        if (k == 0) throw ConfigError("config: channel.k is required for kind mbc");
        m = channel::MakeDefaultMbc(k);
      }
      m.shared_chain = shared;
      return m;
    }
    if (kind == "dbc") {
      channel::ChannelModel m = channel::DistanceThreshold{d};
      channel::Validate(m);
      return m;
    }
  } catch (const ConfigError&) {
    throw;
  } catch (const std::exception& e) {
    throw ConfigError(std::string("config: channel: ") + e.what());
  }
  throw ConfigError("config: 'channel.kind' must be unrestricted, dropout, mbc or dbc; got '" +
                    kind + "'");
}

CellSpec ResolveObject(const json& obj, const std::filesystem::path& base_dir) {
  Section root(obj, "");
  CellSpec cell;

  std::string scenario_name;
  root.String("scenario", scenario_name);
  if (scenario_name.empty()) throw ConfigError("config: 'scenario' is required (string)");
  env::Scenario scenario;
  try {
    scenario = env::ParseScenario(scenario_name);
  } catch (const std::exception& e) {
    throw ConfigError(std::string("config: 'scenario' ") + e.what());
  }
  std::size_t n_agents = 0;
  root.Count("n_agents", n_agents);
  cell.train.env = n_agents == 0 ? env::ScenarioConfig::Defaults(scenario)
                                 : env::ScenarioConfig::Defaults(scenario, n_agents);
  auto& t = cell.train;
  if (t.env.n_agents == 6 || t.env.n_agents == 9) t.batch_size = 512;

  cell.algorithm = "cc";
  root.String("algorithm", cell.algorithm);
  ApplyPreset(cell.algorithm, cell);

  if (const json* e = root.Get("env")) {
    Section s(*e, "env");
    auto& c = t.env;
    s.Count("episode_length", c.episode_length);
    s.Number("dt", c.dt);
    s.Number("damping", c.damping);
    s.Number("fov_radius", c.fov_radius);
    s.Number("world_half_extent", c.world_half_extent);
    s.Number("contact_stiffness", c.contact_stiffness);
    s.Number("contact_margin", c.contact_margin);
    s.Number("agent_radius", c.agent_radius);
    s.Number("predator_radius", c.predator_radius);
    s.Number("prey_radius", c.prey_radius);
    s.Number("obstacle_radius", c.obstacle_radius);
    s.Number("collision_penalty", c.collision_penalty);
    s.Number("capture_bonus", c.capture_bonus);
    s.Number("arrival_bonus", c.arrival_bonus);
    s.Number("arrival_radius", c.arrival_radius);
    s.Number("agent_force_scale", c.agent_force_scale);
    s.Number("prey_force_scale", c.prey_force_scale);
    s.Number("prey_perception", c.prey_perception);
    s.Count("prey_candidates", c.prey_candidates);
    s.RejectUnknown();
  }
  if (const json* c = root.Get("channel")) {
    Section s(*c, "channel");
    t.train_channel = ReadChannel(s, base_dir);
  }
  if (const json* tr = root.Get("train")) {
    Section s(*tr, "train");
    s.Number("gamma", t.gamma);
    s.Number("tau", t.tau);
    s.Number("actor_lr", t.actor_lr);
    s.Number("critic_lr", t.critic_lr);
    s.Count("batch_size", t.batch_size);
    s.Count("buffer_capacity", t.buffer_capacity);
    s.Count("total_steps", t.total_steps);
    s.Count("update_every", t.update_every);
    s.Count("warmup", t.warmup);
    s.Count("msg_dim", t.msg_dim);
    s.Count("hidden", t.hidden);
    s.Number("ou_theta", t.ou.theta);
    s.Number("ou_sigma", t.ou.sigma);
    s.Number("noise_decay_fraction", t.noise_decay_fraction);
    s.RejectUnknown();
  }
  if (const json* sh = root.Get("shaping")) {
    Section s(*sh, "shaping");
    auto& d = t.dumie;
    s.Number("alpha", d.coeffs.alpha);
    s.Number("beta", d.coeffs.beta);
    s.Count("update_every", d.update_every);
    s.Count("buffer_capacity", d.buffer_capacity);
    s.Count("update_batch", d.update_batch);
    s.Count("mi_batch", d.mi_batch);
    s.Number("lr", d.lr);
    s.Bool("normalize_pairs", d.normalize_pairs);
    s.RejectUnknown();
  }
  cell.eval_channels = channel::StandardEvalChannels();
  if (const json* ev = root.Get("eval")) {
    Section s(*ev, "eval");
    s.Count("episodes", cell.eval_episodes);
    if (const json* chs = s.Get("channels")) {
      if (!chs->is_array()) TypeError("eval.channels", "array of strings", *chs);
      cell.eval_channels.clear();
      for (const auto& c : *chs) {
        if (!c.is_string()) TypeError("eval.channels[]", "string", c);
        const std::string label = c.get<std::string>();
        try {
          channel::ParseChannel(label);
        } catch (const std::exception& e) {
          throw ConfigError(std::string("config: eval.channels: ") + e.what());
        }
        cell.eval_channels.push_back(label);
      }
    }
    s.RejectUnknown();
  }
  if (const json* seeds = root.Get("seeds")) {
    if (!seeds->is_array() || seeds->empty()) TypeError("seeds", "nonempty array of integers", *seeds);
    cell.seeds.clear();
    std::set<std::uint64_t> distinct;
    for (const auto& v : *seeds) {
      if (!v.is_number_integer() || v.get<std::int64_t>() < 0) {
        TypeError("seeds[]", "non-negative integer", v);
      }
      const auto seed = v.get<std::uint64_t>();
      if (!distinct.insert(seed).second) throw ConfigError("config: 'seeds' contains a duplicate");
      cell.seeds.push_back(seed);
    }
  }
  root.String("label", cell.label);
  root.String("name", cell.name);
  // Keys consumed at the experiment level.
  root.Get("out");
  root.Get("experiment");
  root.Get("cells");
  root.RejectUnknown();

  if (cell.label.empty()) cell.label = cell.algorithm;
  if (cell.name.empty()) {
    cell.name = std::string(env::ScenarioName(scenario)) + "_n" + std::to_string(t.env.n_agents) +
                "_" + cell.algorithm + "_" + channel::Describe(t.train_channel) + "_a" +
                FormatNumber(t.dumie.coeffs.alpha) + "_b" + FormatNumber(t.dumie.coeffs.beta);
  }
  try {
    t.Validate();
  } catch (const std::invalid_argument& e) {
    throw ConfigError(std::string("config: ") + e.what());
  }
  return cell;
}

json ParseJson(std::string_view text) {
  try {
    return json::parse(text.begin(), text.end());
  } catch (const json::parse_error& e) {
    throw ConfigError(std::string("config: invalid JSON: ") + e.what());
  }
}

}  // namespace

CellSpec ResolveCell(std::string_view json_object, const std::filesystem::path& base_dir) {
  return ResolveObject(ParseJson(json_object), base_dir);
}

ExperimentSpec ParseConfig(std::string_view json_text, const std::filesystem::path& base_dir) {
  const json doc = ParseJson(json_text);
  if (!doc.is_object()) TypeError("<root>", "object", doc);
  ExperimentSpec spec;
  if (auto it = doc.find("experiment"); it != doc.end()) {
    if (!it->is_string()) TypeError("experiment", "string", *it);
    spec.name = it->get<std::string>();
  }
  if (auto it = doc.find("out"); it != doc.end()) {
    if (!it->is_string()) TypeError("out", "string", *it);
    spec.out = it->get<std::string>();
  }
  auto cells = doc.find("cells");
  if (cells == doc.end()) {
    spec.cells.push_back(ResolveObject(doc, base_dir));
  } else {
    if (!cells->is_array() || cells->empty()) TypeError("cells", "nonempty array of objects", *cells);
    json shared = doc;
    shared.erase("cells");
    for (std::size_t i = 0; i < cells->size(); ++i) {
      const json& c = (*cells)[i];
      if (!c.is_object()) TypeError("cells[" + std::to_string(i) + "]", "object", c);
      json merged = shared;
      merged.merge_patch(c);
      spec.cells.push_back(ResolveObject(merged, base_dir));
    }
  }
  std::set<std::string> names;
  for (const auto& c : spec.cells) {
    if (!names.insert(c.name).second) {
      throw ConfigError("config: duplicate cell name '" + c.name + "'");
    }
  }
  return spec;
}

ExperimentSpec LoadConfig(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw ConfigError("config: cannot open " + path.string());
  std::stringstream ss;
  ss << in.rdbuf();
  return ParseConfig(ss.str(), path.parent_path());
}

void ApplyPaperScale(ExperimentSpec& spec) {
  for (auto& c : spec.cells) c.train.total_steps = kPaperScaleSteps;
}

std::string DumpCell(const CellSpec& cell) {
  const auto& t = cell.train;
  const auto& e = t.env;
  json j;
  j["name"] = cell.name;
  j["algorithm"] = cell.algorithm;
  j["label"] = cell.label;
  j["scenario"] = std::string(env::ScenarioName(e.scenario));
  j["n_agents"] = e.n_agents;
  j["env"] = {{"episode_length", e.episode_length},
              {"dt", e.dt},
              {"damping", e.damping},
              {"fov_radius", std::isfinite(e.fov_radius) ? json(e.fov_radius) : json("inf")},
              {"world_half_extent", e.world_half_extent},
              {"contact_stiffness", e.contact_stiffness},
              {"contact_margin", e.contact_margin},
              {"agent_radius", e.agent_radius},
              {"predator_radius", e.predator_radius},
              {"prey_radius", e.prey_radius},
              {"obstacle_radius", e.obstacle_radius},
              {"collision_penalty", e.collision_penalty},
              {"capture_bonus", e.capture_bonus},
              {"arrival_bonus", e.arrival_bonus},
              {"arrival_radius", e.arrival_radius},
              {"agent_force_scale", e.agent_force_scale},
              {"prey_force_scale", e.prey_force_scale},
              {"prey_perception", e.prey_perception},
              {"prey_candidates", e.prey_candidates}};
  j["channel"] = {{"label", channel::Describe(t.train_channel)}};
  j["train"] = {{"gamma", t.gamma},
                {"tau", t.tau},
                {"actor_lr", t.actor_lr},
                {"critic_lr", t.critic_lr},
                {"batch_size", t.batch_size},
                {"buffer_capacity", t.buffer_capacity},
                {"total_steps", t.total_steps},
                {"update_every", t.update_every},
                {"warmup", t.warmup},
                {"msg_dim", t.msg_dim},
                {"hidden", t.hidden},
                {"ou_theta", t.ou.theta},
                {"ou_sigma", t.ou.sigma},
                {"noise_decay_fraction", t.noise_decay_fraction}};
  j["shaping"] = {{"alpha", t.dumie.coeffs.alpha},
                  {"beta", t.dumie.coeffs.beta},
                  {"update_every", t.dumie.update_every},
                  {"buffer_capacity", t.dumie.buffer_capacity},
                  {"update_batch", t.dumie.update_batch},
                  {"mi_batch", t.dumie.mi_batch},
                  {"lr", t.dumie.lr},
                  {"normalize_pairs", t.dumie.normalize_pairs}};
  j["eval"] = {{"channels", cell.eval_channels}, {"episodes", cell.eval_episodes}};
  j["seeds"] = cell.seeds;
  return j.dump(2) + "\n";
}

}  // namespace ccmarl::harness
