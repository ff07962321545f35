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

#include "uavsec/bcd.hpp"

#include <algorithm>
#include <chrono>
#include <cmath>

namespace uavsec {

namespace {

using Clock = std::chrono::steady_clock;

double ms_since(Clock::time_point t0) {
  return std::chrono::duration<double, std::milli>(Clock::now() - t0).count();
}

std::optional<double> fixed_rho(Scheme s) {
  switch (s) {
    case Scheme::kNoPowerSplit:
      return 0.5;
    case Scheme::kNoArtificialNoise:
      return 1.0;
    default:
      return std::nullopt;
  }
}

// Re-tags stage failures so the caller can tell which block broke.
template <typename Fn>
auto with_stage(const char* stage, int outer, Fn&& fn) {
  try {
    return fn();
  } catch (const ConvergenceError& e) {
    throw ConvergenceError(std::string(stage) + " (outer " +
                           std::to_string(outer) + "): " + e.what());
  } catch (const NumericError& e) {
    throw NumericError(std::string(stage) + " (outer " +
                       std::to_string(outer) + "): " + e.what());
  }
}

}  // namespace

std::string_view scheme_name(Scheme s) {
  switch (s) {
    case Scheme::kFull:
      return "full";
    case Scheme::kFixedTrajectory:
      return "ft";
    case Scheme::kNoPowerSplit:
      return "nps";
    case Scheme::kNoArtificialNoise:
      return "noan";
  }
  return "unknown";
}

std::optional<Scheme> parse_scheme(std::string_view name) {
  for (Scheme s : {Scheme::kFull, Scheme::kFixedTrajectory,
                   Scheme::kNoPowerSplit, Scheme::kNoArtificialNoise}) {
    if (scheme_name(s) == name) return s;
  }
  return std::nullopt;
}

void initialize(const Scenario& scen, Scheme scheme, Trajectory& traj,
                PowerPlan& plan) {
  scen.validate();
  traj = straight_line(scen);
  const FeasibilityReport rep = check_trajectory(traj, scen);
  if (!rep.all_passed()) {
    throw InfeasibleScenario("straight-line initialization infeasible: " +
                             rep.summary());
  }
  plan = PowerPlan(scen.T);
  const double rho = fixed_rho(scheme).value_or(0.5);
  std::fill(plan.p.begin(), plan.p.end(), scen.P_bar);
  std::fill(plan.rho.begin(), plan.rho.end(), scen.P_bar > 0 ? rho : 0.0);
}

double objective_bits(const Trajectory& traj, const PowerPlan& plan,
                      const Scenario& scen) {
  return nats_to_bits(secrecy_rate(traj, plan, scen).unclamped_average);
}

RunReport bcd_run(const Scenario& scen, Scheme scheme, const BcdConfig& cfg) {
  const auto t_start = Clock::now();
  RunReport rep;
  rep.scheme = scheme;
  initialize(scen, scheme, rep.traj, rep.plan);
  if (cfg.init_traj) rep.traj = *cfg.init_traj;
  if (cfg.init_plan) rep.plan = *cfg.init_plan;

  PowerStepOptions popt = cfg.power;
  if (auto r = fixed_rho(scheme)) popt.fixed_rho = r;

  std::optional<AdmmState> warm;
  double obj = objective_bits(rep.traj, rep.plan, scen);
  rep.objective_trace.push_back(obj);

  for (int outer = 1; outer <= cfg.max_outer; ++outer) {
    const double obj_prev = obj;

    // Power block, linearized at the current split.
    auto t0 = Clock::now();
    const PowerStepResult ps = with_stage("power step", outer, [&] {
      return power_step(rep.traj, to_split(rep.plan), scen, popt);
    });
    PowerPlan plan_new = to_plan(ps.split);
    if (popt.fixed_rho) {
      for (std::size_t i = 0; i < plan_new.size(); ++i) {
        plan_new.rho[i] = plan_new.p[i] > 0 ? *popt.fixed_rho : 0.0;
      }
    }
    const double obj_power = objective_bits(rep.traj, plan_new, scen);
    if (obj_power >= obj) {
      rep.plan = std::move(plan_new);
      obj = obj_power;
    }
    rep.times.power_ms += ms_since(t0);

    // Trajectory block, linearized at the current trajectory.
    if (scheme != Scheme::kFixedTrajectory) {
      t0 = Clock::now();
      const Distances d = compute_distances(rep.traj, scen);
      AdmmResult ar = with_stage("trajectory ADMM", outer, [&] {
        return admm_run(rep.traj, d.dI2, d.dE2, rep.plan, scen, cfg.admm,
                        warm ? &*warm : nullptr);
      });
      if (cfg.warm_start_duals) warm = std::move(ar.final_state);
      rep.admm_iterations.push_back(ar.iterations);
      rep.admm_r.push_back(std::move(ar.r_trace));
      rep.admm_s.push_back(std::move(ar.s_trace));
      const double obj_traj = objective_bits(ar.traj, rep.plan, scen);
      if (obj_traj >= obj) {
        rep.traj = std::move(ar.traj);
        obj = obj_traj;
      } else {
        ++rep.rejected_trajectory_steps;
      }
      rep.times.trajectory_ms += ms_since(t0);
    }

    rep.objective_trace.push_back(obj);
    rep.outer_iterations = outer;
    const double gain = (obj - obj_prev) / std::max(std::abs(obj_prev), 1e-12);
    if (gain < cfg.tau) {
      rep.converged = true;
      break;
    }
  }

  if (cfg.zero_negative_slots) {
    const LinkMetrics m = link_metrics(rep.traj, rep.plan, scen);
    for (std::size_t i = 0; i < m.rs.size(); ++i) {
      if (std::log1p(m.snrI[i]) - std::log1p(m.sinrE[i]) < 0) {
        rep.plan.p[i] = 0;
        rep.plan.rho[i] = 0;
      }
    }
  }

  const SecrecyRates r = secrecy_rate(rep.traj, rep.plan, scen);
  rep.final_rate = nats_to_bits(r.average);
  rep.final_unclamped = nats_to_bits(r.unclamped_average);
  rep.feasibility = check_feasibility(rep.traj, rep.plan, scen);
  rep.times.total_ms = ms_since(t_start);
  return rep;
}

}  // namespace uavsec
