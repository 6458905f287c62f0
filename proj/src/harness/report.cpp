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

#include "ccmarl/harness/report.hpp"

#include <algorithm>
#include <cstdio>
#include <fstream>
#include <map>
#include <ostream>
#include <sstream>
#include <stdexcept>

namespace ccmarl::harness {
namespace fs = std::filesystem;

namespace {

std::vector<std::string> SplitCsv(const std::string& line) {
  std::vector<std::string> out;
  std::string field;
  std::istringstream ss(line);
  while (std::getline(ss, field, ',')) out.push_back(field);
  if (!line.empty() && line.back() == ',') out.emplace_back();
  return out;
}

std::string Num(double v) {
  char buf[64];
  std::snprintf(buf, sizeof(buf), "%.10g", v);
  return buf;
}

std::uint64_t SeedOf(const fs::path& dir) {
  const std::string name = dir.filename().string();
  return std::stoull(name.substr(5));
}

bool IsSeedDir(const fs::path& p) {
  const std::string name = p.filename().string();
  return fs::is_directory(p) && name.starts_with("seed_") && name.size() > 5 &&
         name.find_first_not_of("0123456789", 5) == std::string::npos;
}

// Per-seed means and stds averaged across seeds, in insertion order.
struct Aggregate {
  double mean_sum = 0.0;
  double std_sum = 0.0;
  std::size_t count = 0;

  void Add(const EvalReport& r) {
    mean_sum += r.mean;
    std_sum += r.std;
    ++count;
  }
  double mean() const { return mean_sum / static_cast<double>(count); }
  double std() const { return std_sum / static_cast<double>(count); }
};

template <typename T>
void PushUnique(std::vector<T>& v, const T& x) {
  if (std::find(v.begin(), v.end(), x) == v.end()) v.push_back(x);
}

std::string PadRight(const std::string& s, std::size_t width) {
  // Display width: count code points, not bytes.
  std::size_t shown = 0;
  for (unsigned char c : s) shown += (c & 0xC0) != 0x80;
  return s + std::string(width > shown ? width - shown : 0, ' ');
}

std::size_t DisplayWidth(const std::string& s) {
  std::size_t shown = 0;
  for (unsigned char c : s) shown += (c & 0xC0) != 0x80;
  return shown;
}

std::vector<std::pair<std::uint64_t, fs::path>> SeedDirs(const fs::path& cell_dir) {
  std::vector<std::pair<std::uint64_t, fs::path>> out;
  for (const auto& e : fs::directory_iterator(cell_dir)) {
    if (IsSeedDir(e.path())) out.emplace_back(SeedOf(e.path()), e.path());
  }
  std::sort(out.begin(), out.end());
  return out;
}

std::vector<fs::path> CellDirs(const fs::path& results_dir) {
  std::vector<fs::path> out;
  if (!fs::is_directory(results_dir)) return out;
  for (const auto& e : fs::directory_iterator(results_dir)) {
    if (e.is_directory() && e.path().filename() != "plots") out.push_back(e.path());
  }
  std::sort(out.begin(), out.end());
  return out;
}

}  // namespace

std::vector<EvalReport> ReadEvalCsv(std::istream& in, const std::string& cell) {
  std::vector<EvalReport> out;
  std::string line;
  if (!std::getline(in, line)) return out;
  while (std::getline(in, line)) {
    if (line.empty()) continue;
    const auto f = SplitCsv(line);
    if (f.size() != 12) throw std::runtime_error("eval.csv: malformed row '" + line + "'");
    EvalReport r;
    r.cell = cell;
    r.scenario = f[0];
    r.n_agents = std::stoul(f[1]);
    r.algorithm = f[2];
    r.train_channel = f[3];
    r.eval_channel = f[4];
    r.seed = std::stoull(f[5]);
    r.mean = std::stod(f[6]);
    r.std = std::stod(f[7]);
    r.n_episodes = std::stoul(f[8]);
    r.seconds = std::stod(f[9]);
    r.alpha = std::stod(f[10]);
    r.beta = std::stod(f[11]);
    out.push_back(r);
  }
  return out;
}

std::vector<EvalReport> CollectReports(const fs::path& results_dir) {
  std::vector<EvalReport> out;
  for (const auto& cell_dir : CellDirs(results_dir)) {
    for (const auto& [seed, dir] : SeedDirs(cell_dir)) {
      std::ifstream in(dir / "eval.csv");
      if (!in) continue;
      auto rows = ReadEvalCsv(in, cell_dir.filename().string());
      out.insert(out.end(), rows.begin(), rows.end());
    }
  }
  return out;
}

void WriteResultsCsv(std::ostream& out, const std::vector<EvalReport>& reports) {
  out << "scenario,n_agents,algorithm,train_channel,eval_channel,seed,mean,std\n";
  for (const auto& r : reports) {
    out << r.scenario << ',' << r.n_agents << ',' << r.algorithm << ',' << r.train_channel << ','
        << r.eval_channel << ',' << r.seed << ',' << Num(r.mean) << ',' << Num(r.std) << '\n';
  }
}

std::string FormatMeanStd(double mean, double std) {
  char buf[96];
  std::snprintf(buf, sizeof(buf), "%.1f±%.1f", mean, std);
  return buf;
}

std::string PivotTable(const std::vector<EvalReport>& reports) {
  using GroupKey = std::pair<std::string, std::size_t>;
  std::vector<GroupKey> groups;
  for (const auto& r : reports) PushUnique(groups, GroupKey{r.scenario, r.n_agents});

  std::ostringstream out;
  for (const auto& g : groups) {
    std::vector<std::string> rows, cols;
    std::map<std::pair<std::string, std::string>, Aggregate> cells;
    for (const auto& r : reports) {
      if (GroupKey{r.scenario, r.n_agents} != g) continue;
      PushUnique(rows, r.eval_channel);
      PushUnique(cols, r.algorithm);
      cells[{r.eval_channel, r.algorithm}].Add(r);
    }
    std::vector<std::vector<std::string>> grid;
    grid.push_back({"eval_channel"});
    for (const auto& c : cols) grid.back().push_back(c);
    for (const auto& row : rows) {
      std::vector<std::string> line{row};
      for (const auto& c : cols) {
        auto it = cells.find({row, c});
        line.push_back(it == cells.end() ? "—" : FormatMeanStd(it->second.mean(), it->second.std()));
      }
      grid.push_back(std::move(line));
    }
    std::vector<std::size_t> width(cols.size() + 1, 0);
    for (const auto& line : grid) {
      for (std::size_t k = 0; k < line.size(); ++k) width[k] = std::max(width[k], DisplayWidth(line[k]));
    }
    out << g.first << " (N=" << g.second << ")\n";
    for (const auto& line : grid) {
      for (std::size_t k = 0; k < line.size(); ++k) {
        out << (k == 0 ? "" : "  ") << (k + 1 == line.size() ? line[k] : PadRight(line[k], width[k]));
      }
      out << '\n';
    }
    out << '\n';
  }
  return out.str();
}

std::string WriteReport(const fs::path& results_dir) {
  const auto reports = CollectReports(results_dir);
  {
    std::ofstream csv(results_dir / "results.csv", std::ios::binary | std::ios::trunc);
    WriteResultsCsv(csv, reports);
  }
  const std::string table = PivotTable(reports);
  std::ofstream(results_dir / "table.txt", std::ios::binary | std::ios::trunc) << table;
  return table;
}

std::vector<double> MovingAverage(const std::vector<double>& values, std::size_t window) {
  if (values.empty() || window == 0) return {};
  const std::size_t w = std::min(window, values.size());
  std::vector<double> out;
  out.reserve(values.size() - w + 1);
  double sum = 0.0;
  for (std::size_t k = 0; k < values.size(); ++k) {
    sum += values[k];
    if (k >= w) sum -= values[k - w];
    if (k + 1 >= w) out.push_back(sum / static_cast<double>(w));
  }
  return out;
}

PlotDataSummary EmitPlotData(const fs::path& results_dir, std::ostream* warnings) {
  PlotDataSummary summary;
  const fs::path plots = results_dir / "plots";
  fs::create_directories(plots / "curves");
  for (const auto& cell_dir : CellDirs(results_dir)) {
    for (const auto& [seed, dir] : SeedDirs(cell_dir)) {
      std::ifstream in(dir / "metrics.csv");
      std::vector<double> steps, returns;
      std::string line;
      if (in && std::getline(in, line)) {
        while (std::getline(in, line)) {
          const auto f = SplitCsv(line);
          if (f.size() < 3) continue;
          steps.push_back(std::stod(f[0]));
          returns.push_back(std::stod(f[2]));
        }
      }
      if (returns.empty()) {
        ++summary.skipped;
        if (warnings != nullptr) {
          *warnings << "warning: no metrics in " << (dir / "metrics.csv").string() << ", skipped\n";
        }
        continue;
      }
      const auto smooth = MovingAverage(returns, 10);
      const std::size_t offset = returns.size() - smooth.size();
      std::ofstream out(plots / "curves" /
                            (cell_dir.filename().string() + "_seed" + std::to_string(seed) + ".csv"),
                        std::ios::binary | std::ios::trunc);
      out << "step,return\n";
      for (std::size_t k = 0; k < smooth.size(); ++k) {
        out << Num(steps[k + offset]) << ',' << Num(smooth[k]) << '\n';
      }
      ++summary.curves;
    }
  }

  struct Key {
    std::string scenario;
    std::size_t n_agents;
    std::string train_channel;
    double alpha, beta;
    std::string eval_channel;
    bool operator==(const Key&) const = default;
  };
  std::vector<Key> keys;
  std::vector<Aggregate> aggs;
  for (const auto& r : CollectReports(results_dir)) {
    const Key k{r.scenario, r.n_agents, r.train_channel, r.alpha, r.beta, r.eval_channel};
    auto it = std::find(keys.begin(), keys.end(), k);
    if (it == keys.end()) {
      keys.push_back(k);
      aggs.emplace_back();
      aggs.back().Add(r);
    } else {
      aggs[static_cast<std::size_t>(it - keys.begin())].Add(r);
    }
  }
  std::ofstream out(plots / "ablation.csv", std::ios::binary | std::ios::trunc);
  out << "scenario,n_agents,train_channel,alpha,beta,eval_channel,mean,std,seeds\n";
  for (std::size_t k = 0; k < keys.size(); ++k) {
    const Key& key = keys[k];
    out << key.scenario << ',' << key.n_agents << ',' << key.train_channel << ',' << Num(key.alpha)
        << ',' << Num(key.beta) << ',' << key.eval_channel << ',' << Num(aggs[k].mean()) << ','
        << Num(aggs[k].std()) << ',' << aggs[k].count << '\n';
  }
  summary.ablation_rows = keys.size();
  return summary;
}

}  // namespace ccmarl::harness
