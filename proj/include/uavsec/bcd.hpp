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

// Outer block coordinate ascent: alternates the power step and the
// trajectory ADMM, re-linearizing both surrogates at every outer iteration.
// Baselines freeze either the trajectory (FT) or the split ratio (NPS at
// rho = 0.5, no-AN at rho = 1).

#pragma once

#include <optional>
#include <string>
#include <string_view>
#include <vector>

#include "uavsec/power_alloc.hpp"
#include "uavsec/scenario.hpp"
#include "uavsec/trajectory_admm.hpp"

namespace uavsec {

enum class Scheme {
  kFull,               // joint trajectory, power and split
  kFixedTrajectory,    // FT: straight line, power and split optimized
  kNoPowerSplit,       // NPS: rho fixed at 0.5
  kNoArtificialNoise,  // rho fixed at 1
};

std::string_view scheme_name(Scheme s);
// Accepts "full", "ft", "nps", "noan".  Returns nullopt otherwise.
std::optional<Scheme> parse_scheme(std::string_view name);

struct BcdConfig {
  double tau = 1e-4;  // stop when the fractional objective increase < tau
  int max_outer = 50;
  // Custom starting point; straight line with p = P_bar otherwise.
  std::optional<Trajectory> init_traj;
  std::optional<PowerPlan> init_plan;
  AdmmConfig admm;
  // Seed each ADMM run with the multipliers of the previous one.
  bool warm_start_duals = false;
  PowerStepOptions power;
  // Zero the power of slots whose unclamped rate is negative at the end.
  bool zero_negative_slots = true;
};

struct StageTimes {
  double power_ms = 0;
  double trajectory_ms = 0;
  double total_ms = 0;
};

struct RunReport {
  Scheme scheme = Scheme::kFull;
  // Unclamped average rate [bits/s/Hz] at the start and after every outer
  // iteration.
  std::vector<double> objective_trace;
  double final_rate = 0;       // clamped average [bits/s/Hz]
  double final_unclamped = 0;  // [bits/s/Hz]
  int outer_iterations = 0;
  bool converged = false;
  StageTimes times;
  // Per outer iteration; empty for FT.
  std::vector<int> admm_iterations;
  std::vector<std::vector<double>> admm_r, admm_s;
  // Trajectory steps discarded because the true objective went down.
  int rejected_trajectory_steps = 0;
  Trajectory traj;
  PowerPlan plan;
  FeasibilityReport feasibility;
};

// Straight line at constant speed, p = P_bar and the scheme's split
// (0.5 unless rho is fixed at 1).  Throws InfeasibleScenario if the straight
// line breaks the speed or energy limits.
void initialize(const Scenario& scen, Scheme scheme, Trajectory& traj,
                PowerPlan& plan);

// Unclamped average rate in bits.
double objective_bits(const Trajectory& traj, const PowerPlan& plan,
                      const Scenario& scen);

RunReport bcd_run(const Scenario& scen, Scheme scheme,
                  const BcdConfig& cfg = {});

inline RunReport baseline_ft(const Scenario& scen, const BcdConfig& cfg = {}) {
  return bcd_run(scen, Scheme::kFixedTrajectory, cfg);
}
inline RunReport baseline_nps(const Scenario& scen, const BcdConfig& cfg = {}) {
  return bcd_run(scen, Scheme::kNoPowerSplit, cfg);
}
inline RunReport baseline_noan(const Scenario& scen,
                               const BcdConfig& cfg = {}) {
  return bcd_run(scen, Scheme::kNoArtificialNoise, cfg);
}

}  // namespace uavsec
