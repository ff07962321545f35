// Copyright 2026 The uavsec Authors
//
// Licensed under the Apache License, Version 2.0 (the "License");
// you may not use this file except in compliance with the License.
// You may obtain a copy of the License at
//
//     http://www.apache.org/licenses/LICENSE-2.0
//
// Unless required by applicable law or agreed to in writing, software
// distributed under the License is distributed on an "AS IS" BASIS,
// WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
// See the License for the specific language governing permissions and
// limitations under the License.

// Experiment runner: expands a spec into (scheme, sweep value) runs,
// executes them on a small worker pool and writes the CSV artifacts.
//
//   summary.csv       one row per run
//   trace_<run>.csv   objective per outer iteration, ADMM residuals
//   traj_<run>.csv    slot, x, y, p, rho of the final plan
//
// Numbers use 12 significant digits.  In deterministic mode the wall-clock
// columns of summary.csv are left empty and the timings go to timings.csv,
// so every other file is byte-stable across runs.

#pragma once

#include <filesystem>
#include <iosfwd>
#include <optional>
#include <string>
#include <vector>

#include "uavsec/bcd.hpp"
#include "uavsec/config.hpp"

namespace uavsec {

// Exit codes of the command-line tool.
constexpr int kExitOk = 0;
constexpr int kExitConfig = 1;
constexpr int kExitSolver = 2;

// Environment variable holding the default worker count.
constexpr const char* kThreadsEnv = "UAVSEC_THREADS";

struct RunRecord {
  std::string label;
  Scheme scheme = Scheme::kFull;
  double sweep_value = 0;  // NaN without a sweep
  Scenario scenario;
  std::optional<RunReport> report;
  std::string error_kind;  // empty on success
  std::string error;
};

struct ExperimentResult {
  std::vector<RunRecord> runs;
  int threads_used = 1;
  bool ok() const;
};

std::string format_number(double v);  // %.12g, "nan"/"inf" spelled out
std::string run_label(const ExperimentSpec& spec, Scheme scheme,
                      double sweep_value);

// UAVSEC_THREADS if set to a positive integer, else the hardware
// concurrency (at least 1).
int default_threads();

// Runs every (scheme, sweep value) pair.  Solver errors are caught per run
// and recorded; nothing is written to disk.
ExperimentResult run_experiment(const ExperimentSpec& spec, int threads = 0);

void write_summary(std::ostream& out, const ExperimentSpec& spec,
                   const ExperimentResult& res);
void write_trace(std::ostream& out, const RunReport& rep);
void write_trajectory(std::ostream& out, const RunReport& rep);
// Writes every artifact under spec.output_dir (created if needed).
void write_outputs(const ExperimentSpec& spec, const ExperimentResult& res);

struct PresetInfo {
  std::string name;
  std::string description;  // first comment line of the file
  std::filesystem::path path;
};
std::filesystem::path preset_dir();
std::vector<PresetInfo> list_presets();

// Command-line entry point: run <spec>, validate <spec>, presets list.
// <spec> is a file path or a preset name.  Errors are reported on err as a
// one-line JSON record.
int run_cli(const std::vector<std::string>& args, std::ostream& out,
            std::ostream& err);

}  // namespace uavsec
