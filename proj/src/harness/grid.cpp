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

#include "ccmarl/harness/grid.hpp"

#include <algorithm>
#include <atomic>
#include <chrono>
#include <cstdio>
#include <fstream>
#include <mutex>
#include <ostream>
#include <sstream>
#include <thread>

#include "ccmarl/maddpg/networks.hpp"
#include "ccmarl/maddpg/trainer.hpp"

namespace ccmarl::harness {
namespace fs = std::filesystem;

namespace {

constexpr std::uint64_t kEvalStream = 0xE7A1;

void WriteFileAtomic(const fs::path& path, const std::string& text) {
  const fs::path tmp = path.string() + ".tmp";
  {
    std::ofstream out(tmp, std::ios::binary | std::ios::trunc);
    if (!out) throw std::runtime_error("cannot write " + tmp.string());
    out << text;
    if (!out) throw std::runtime_error("write failed: " + tmp.string());
  }
  fs::rename(tmp, path);
}

std::string Num(double v) {
  char buf[64];
  std::snprintf(buf, sizeof(buf), "%.10g", v);
  return buf;
}

}  // namespace

fs::path SeedDir(const fs::path& out, const CellSpec& cell, std::uint64_t seed) {
  return out / cell.name / ("seed_" + std::to_string(seed));
}

std::uint64_t EvalSeed(std::uint64_t seed) { return DeriveSeed(seed, kEvalStream); }

void WriteEvalHeader(std::ostream& out) {
  out << "scenario,n_agents,algorithm,train_channel,eval_channel,seed,mean,std,n_episodes,"
         "seconds,alpha,beta\n";
}

void EvaluateCheckpoint(const CellSpec& cell, std::uint64_t seed, const fs::path& checkpoint_dir,
                        const std::vector<std::string>& channels, std::ostream& eval_csv,
                        std::ostream* episodes_csv) {
  maddpg::TrainConfig cfg = cell.train;
  cfg.seed = seed;
  maddpg::Trainer shell(cfg);
  std::vector<maddpg::ActorNet> actors = shell.actors();
  maddpg::LoadActors(actors, checkpoint_dir);
  for (const auto& label : channels) {
    const auto start = std::chrono::steady_clock::now();
    const maddpg::EvalResult r = maddpg::Evaluate(actors, cfg.env, channel::ParseChannel(label),
                                                  cell.eval_episodes, EvalSeed(seed));
    const double secs =
        std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();
    eval_csv << env::ScenarioName(cfg.env.scenario) << ',' << cfg.env.n_agents << ','
             << cell.label << ',' << channel::Describe(cfg.train_channel) << ',' << label << ','
             << seed << ',' << Num(r.mean) << ',' << Num(r.std) << ',' << r.returns.size() << ','
             << Num(secs) << ',' << Num(cfg.dumie.coeffs.alpha) << ','
             << Num(cfg.dumie.coeffs.beta) << '\n';
    if (episodes_csv != nullptr) {
      for (std::size_t e = 0; e < r.returns.size(); ++e) {
        *episodes_csv << label << ',' << e << ',' << Num(r.returns[e]) << '\n';
      }
    }
  }
}

void RunCellSeed(const CellSpec& cell, std::uint64_t seed, const fs::path& dir) {
  fs::create_directories(dir);
  fs::remove(dir / "FAILED");
  CellSpec resolved = cell;
  resolved.seeds = {seed};
  WriteFileAtomic(dir / "config.json", DumpCell(resolved));

  maddpg::TrainConfig cfg = cell.train;
  cfg.seed = seed;
  maddpg::Trainer trainer(cfg);
  {
    std::ofstream metrics(dir / "metrics.csv", std::ios::binary | std::ios::trunc);
    trainer.Train(&metrics, dir / "diverged");
  }
  maddpg::SaveNetworks(trainer.actors(), trainer.critic(), dir / "checkpoint");

  std::ostringstream eval_csv, episodes_csv;
  WriteEvalHeader(eval_csv);
  episodes_csv << "eval_channel,episode,return\n";
  EvaluateCheckpoint(cell, seed, dir / "checkpoint", cell.eval_channels, eval_csv, &episodes_csv);
  WriteFileAtomic(dir / "episodes.csv", episodes_csv.str());
  WriteFileAtomic(dir / "eval.csv", eval_csv.str());
}

GridSummary RunGrid(const ExperimentSpec& spec, const GridOptions& opts) {
  struct Job {
    const CellSpec* cell;
    std::uint64_t seed;
  };
  GridSummary summary;
  std::vector<Job> jobs;
  for (const auto& c : spec.cells) {
    for (auto s : c.seeds) {
      if (fs::exists(SeedDir(spec.out, c, s) / "eval.csv")) {
        ++summary.skipped;
      } else {
        jobs.push_back({&c, s});
      }
    }
  }
  std::mutex mu;
  auto log = [&](const std::string& line) {
    if (opts.log == nullptr) return;
    std::lock_guard<std::mutex> lock(mu);
    *opts.log << line << std::endl;
  };
  if (summary.skipped > 0) log("skipping " + std::to_string(summary.skipped) + " completed runs");

  std::atomic<std::size_t> next{0};
  auto worker = [&] {
    for (;;) {
      const std::size_t k = next.fetch_add(1);
      if (k >= jobs.size()) return;
      const Job& job = jobs[k];
      const fs::path dir = SeedDir(spec.out, *job.cell, job.seed);
      const std::string tag = job.cell->name + " seed " + std::to_string(job.seed);
      log("start " + tag);
      const auto start = std::chrono::steady_clock::now();
      try {
        RunCellSeed(*job.cell, job.seed, dir);
        const double secs =
            std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();
        std::lock_guard<std::mutex> lock(mu);
        ++summary.trained;
        if (opts.log != nullptr) *opts.log << "done " << tag << " (" << Num(secs) << " s)" << std::endl;
      } catch (const std::exception& e) {
        std::error_code ec;
        fs::create_directories(dir, ec);
        std::ofstream(dir / "FAILED") << e.what() << '\n';
        std::lock_guard<std::mutex> lock(mu);
        summary.failures.push_back({job.cell->name, job.seed, e.what()});
        if (opts.log != nullptr) *opts.log << "FAILED " << tag << ": " << e.what() << std::endl;
      }
    }
  };
  const std::size_t n_workers = std::max<std::size_t>(1, std::min(opts.parallel, jobs.size()));
  std::vector<std::thread> threads;
  for (std::size_t w = 1; w < n_workers; ++w) threads.emplace_back(worker);
  worker();
  for (auto& t : threads) t.join();
  return summary;
}

}  // namespace ccmarl::harness
