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

// Experiment specs: flat UTF-8 "key = value" files.  '#' starts a comment.
// Physical keys carry their unit in the suffix and are converted to SI
// linear units here, once:
//
//   L_m H_m x1_m y1_m xT_m yT_m      geometry [m]
//   N_s delta_t_s                    flight time and slot length [s]
//   vmax_mps mass_kg e_tr_kj         speed [m/s], mass [kg], energy [kJ]
//   gamma0_db noise_dbm_per_hz bandwidth_hz
//   p_bar_dbm | p_bar_w              average power
//   p_max_dbm | p_max_w | p_max_ratio  peak power (ratio is P_max / P_bar)
//
// Run keys: schemes (comma list of full, ft, nps, noan), sweep (one of
// L_m, N_s, T, p_bar_dbm, e_tr_kj), sweep_values, slot_mode
// (fixed_delta_t | fixed_slots), speed_bound (per_slot | literal),
// output_dir, deterministic, threads, name.  Solver keys: tau, max_outer,
// warm_start, admm_delta, admm_delta_scale, admm_relaxation, admm_eps,
// admm_max_iter, admm_adaptive.
//
// "base = nominal" pre-fills every physical key with the nominal setup;
// without it every physical key is required.

#pragma once

#include <filesystem>
#include <string>
#include <string_view>
#include <vector>

#include "uavsec/bcd.hpp"
#include "uavsec/scenario.hpp"

namespace uavsec {

enum class SlotMode {
  kFixedDeltaT,  // T = N / delta_t
  kFixedSlots,   // delta_t = N / T
};

struct ExperimentSpec {
  std::string name = "run";
  Scenario scenario;
  // P_max / P_bar when the peak is given as a ratio (kept through P_bar
  // sweeps); 0 when it was given as an absolute power.
  double p_max_ratio = 0;
  SlotMode slot_mode = SlotMode::kFixedDeltaT;
  std::vector<Scheme> schemes;
  std::string sweep;  // empty for a single point
  std::vector<double> sweep_values;
  std::string output_dir = "out";
  bool deterministic = true;
  int threads = 0;  // 0 defers to the environment
  BcdConfig bcd;
};

struct Finding {
  enum class Level { kError, kWarning };
  Level level = Level::kError;
  int line = 0;  // 0 when not tied to a line
  std::string key;
  std::string message;
  std::string to_string() const;
};

struct ParseResult {
  ExperimentSpec spec;
  std::vector<Finding> findings;
  bool ok() const;
};

// Parses and lints a spec.  Never throws on bad content; every problem is
// reported as a finding.
ParseResult parse_spec(std::string_view text);
// Throws ConfigError if the file cannot be read.
ParseResult load_spec(const std::filesystem::path& path);

class ConfigError : public Error {
 public:
  using Error::Error;
};

// Scenario at one sweep point (the value in the sweep key's own unit).
Scenario scenario_at(const ExperimentSpec& spec, double sweep_value);
// Sweep values, or a single NaN placeholder when there is no sweep.
std::vector<double> sweep_points(const ExperimentSpec& spec);

// Scenario-level checks at every sweep point: invariants and a feasible
// straight-line initialization.
std::vector<Finding> check_sweep(const ExperimentSpec& spec);

}  // namespace uavsec
