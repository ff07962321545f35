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

#include <gtest/gtest.h>

#include <algorithm>
#include <cmath>

#include "support.hpp"
#include "uavsec/bcd.hpp"
#include "uavsec/oracle.hpp"
#include "uavsec/trajectory_admm.hpp"

namespace uavsec {
namespace {

using testing::Rng;

double rel_gap(double reference, double value) {
  return (reference - value) / (1 + std::abs(reference));
}

TEST(SpeedPair, MatchesProjectedGradient) {
  Rng r(3);
  for (int n = 0; n < 300; ++n) {
    const SpeedPairProblem p = testing::random_speed_pair(r, 6.0);
    const SpeedPairSolution sol = solve_speed_pair(p);
    const oracle::PairResult o = oracle::pg_speed_pair_oracle(p);
    const double v = speed_pair_objective(p, sol.x, sol.xbar_next);
    EXPECT_NEAR(v, oracle::speed_pair_value(p, sol.x, sol.xbar_next),
                1e-12 * (1 + std::abs(v)));
    EXPECT_LE(std::abs(rel_gap(o.value, v)), 1e-6) << "instance " << n;
    EXPECT_LE(std::hypot(sol.x.x - sol.xbar_next.x, sol.x.y - sol.xbar_next.y),
              6.0 * (1 + 1e-12));

    const oracle::LogQuadProgram prog = oracle::speed_pair_program(p);
    Eigen::VectorXd z(4);
    z << sol.x.x, sol.x.y, sol.xbar_next.x, sol.xbar_next.y;
    EXPECT_LE(oracle::kkt_residual(prog, z).max(), 1e-7);
    EXPECT_LE(oracle::kkt_residual(prog, z, Eigen::VectorXd::Constant(1, sol.mu))
                  .max(),
              1e-7);
  }
}

TEST(SpeedPair, PinnedEndsMatchProjectedGradient) {
  Rng r(5);
  for (int n = 0; n < 100; ++n) {
    SpeedPairProblem p = testing::random_speed_pair(r, 6.0);
    if (n % 2 == 0) {
      p.pinned_x = r.point(20);
    } else {
      p.pinned_xbar = r.point(20);
    }
    const SpeedPairSolution sol = solve_speed_pair(p);
    if (p.pinned_x) {
      EXPECT_EQ(sol.x.x, p.pinned_x->x);
      EXPECT_EQ(sol.x.y, p.pinned_x->y);
    } else {
      EXPECT_EQ(sol.xbar_next.x, p.pinned_xbar->x);
      EXPECT_EQ(sol.xbar_next.y, p.pinned_xbar->y);
    }
    const oracle::PairResult o = oracle::pg_speed_pair_oracle(p);
    const double v = speed_pair_objective(p, sol.x, sol.xbar_next);
    EXPECT_LE(std::abs(rel_gap(o.value, v)), 1e-6) << "instance " << n;
  }
}

TEST(DistanceSlot, MatchesBarrierAndKkt) {
  Rng r(7);
  const Scenario scen = Scenario::nominal();
  for (int n = 0; n < 300; ++n) {
    const DistanceSlotProblem p = testing::random_distance_slot(r, scen);
    const DistanceSlotSolution sol = solve_distance_slot(p);
    const oracle::LogQuadProgram prog = oracle::distance_slot_program(p);
    const oracle::BarrierResult br =
        oracle::barrier_maximize(prog, oracle::distance_slot_start(p));
    Eigen::VectorXd z(4);
    z << sol.xtil.x, sol.xtil.y, sol.u, sol.t;
    const double v = prog.objective(z);
    EXPECT_NEAR(v, distance_slot_objective(p, sol.xtil, sol.u, sol.t),
                1e-9 * (1 + std::abs(v)));
    EXPECT_LE(std::abs(rel_gap(br.value, v)), 1e-6) << "instance " << n;
    EXPECT_LE(oracle::kkt_residual(prog, z).max(), 1e-7) << "instance " << n;
    // u sits on its bound, t on the linearized Eve bound.
    const double u_min = sol.xtil.x * sol.xtil.x + sol.xtil.y * sol.xtil.y +
                         p.H * p.H;
    EXPECT_NEAR(sol.u, u_min, 1e-9 * u_min);
    const double bound = distance_bound(p, sol.xtil);
    EXPECT_LE(sol.t, bound + 1e-12 * std::abs(bound));
  }
}

TEST(DistanceSlot, InactiveSlotFollowsConsensus) {
  DistanceSlotProblem p;
  p.x = {12, -7};
  p.omg = {0.3, -0.1};
  p.delta = 0.5;
  p.active = false;
  p.L = 100;
  p.H = 100;
  const DistanceSlotSolution sol = solve_distance_slot(p);
  EXPECT_NEAR(sol.xtil.x, 12 - 0.3 / 0.5, 1e-12);
  EXPECT_NEAR(sol.xtil.y, -7 + 0.1 / 0.5, 1e-12);
}

TEST(EnergyBlock, MatchesBarrierAndKkt) {
  Rng r(11);
  for (int n = 0; n < 150; ++n) {
    const int T = 4 + n % 9;
    const testing::EnergyInstance inst = testing::random_energy_instance(r, T);
    const EnergyBlockResult res = solve_energy_block(inst.state, inst.budget);
    AdmmState after = inst.state;
    after.xddot = res.xddot;
    after.yddot = res.yddot;
    after.xhat = res.xhat;
    after.yhat = res.yhat;

    const oracle::EnergyProgram ep =
        oracle::energy_block_program(inst.state, inst.budget);
    const Eigen::VectorXd z = ep.pack(after);
    const oracle::BarrierResult br =
        oracle::barrier_maximize(ep.prog, ep.start(inst.state));
    const double v = ep.prog.objective(z);
    EXPECT_LE(std::abs(rel_gap(br.value, v)), 1e-6) << "instance " << n;
    EXPECT_LE(oracle::kkt_residual(ep.prog, z).max(), 1e-7);
    EXPECT_LE(
        oracle::kkt_residual(ep.prog, z, Eigen::VectorXd::Constant(1, res.phi))
            .max(),
        1e-7);
    double used = 0;
    for (int k = 0; k + 1 < T; ++k) {
      used += std::pow(res.xddot[k] - res.xddot[k + 1], 2) +
              std::pow(res.yddot[k] - res.yddot[k + 1], 2);
    }
    EXPECT_LE(used, inst.budget * (1 + 1e-9));
    EXPECT_GE(res.phi, 0.0);
  }
}

TEST(DualUpdate, AddsPenaltyTimesMismatch) {
  Rng r(13);
  testing::EnergyInstance inst = testing::random_energy_instance(r, 9);
  AdmmState s = inst.state;
  for (auto* v : {&s.xbar, &s.ytil, &s.xddot}) {
    for (double& e : *v) e += r.uniform(-1, 1);
  }
  const AdmmState before = s;
  dual_update(s);
  for (std::size_t j = 0; j < s.size(); ++j) {
    const double d = s.delta;
    EXPECT_DOUBLE_EQ(s.lam_x[j], before.lam_x[j] + d * (before.xbar[j] - before.x[j]));
    EXPECT_DOUBLE_EQ(s.omg_y[j], before.omg_y[j] + d * (before.ytil[j] - before.y[j]));
    EXPECT_DOUBLE_EQ(s.eta_x[j], before.eta_x[j] + d * (before.xhat[j] - before.x[j]));
    EXPECT_DOUBLE_EQ(s.the_x[j],
                     before.the_x[j] + d * (before.xddot[j] - before.xhat[j]));
  }
}

TEST(Residuals, ZeroAtConsensusAndStationarity) {
  Scenario scen = Scenario::nominal();
  const Trajectory traj = straight_line(scen);
  std::vector<double> u(scen.T, 1e4), t(scen.T, 2e4);
  const AdmmState s = initial_state(traj, u, t, 0.1);
  const Residuals res = residuals(s, s);
  EXPECT_EQ(res.r_norm, 0.0);
  EXPECT_EQ(res.s_norm, 0.0);

  AdmmState moved = s;
  moved.xbar[3] += 0.5;
  EXPECT_NEAR(residuals(s, moved).r_norm, 0.5, 1e-12);
  // xbar[3] is a group-2 copy meeting x[3].
  EXPECT_NEAR(residuals(s, moved).s_norm, 0.1 * 0.5, 1e-12);
}

// Each block is an exact maximizer of the augmented Lagrangian over its own
// variables, so a plain (unrelaxed) sweep never lowers it.
TEST(AugmentedLagrangian, BlockSweepsAreMonotone) {
  Rng r(17);
  for (int rep = 0; rep < 5; ++rep) {
    const Scenario scen = testing::small_scenario(r);
    const Trajectory traj =
        repair_trajectory(testing::jiggled_line(r, scen, 0.5), scen);
    const PowerPlan plan = testing::random_plan(r, scen);
    const Distances d = compute_distances(traj, scen);
    const SurrogateCoeffs c = build_surrogate(traj, d.dI2, d.dE2, plan, scen);
    AdmmState s = initial_state(traj, d.dI2, d.dE2, initial_penalty(c, {}));
    for (int it = 0; it < 30; ++it) {
      double prev = augmented_lagrangian(s, c);
      auto check = [&](const char* what) {
        const double now = augmented_lagrangian(s, c);
        EXPECT_GE(now, prev - 1e-9 * (1 + std::abs(prev)))
            << what << " at iteration " << it;
        prev = now;
      };
      type1_solve(s, Group::kFirst, scen);
      check("type1/first");
      type2_solve(s, Group::kFirst, c, scen);
      check("type2/first");
      type3_solve(s, Group::kFirst, scen);
      check("type3/first");
      type1_solve(s, Group::kSecond, scen);
      check("type1/second");
      type2_solve(s, Group::kSecond, c, scen);
      check("type2/second");
      type3_solve(s, Group::kSecond, scen);
      check("type3/second");
      dual_update(s);
    }
  }
}

TEST(AdmmRun, MatchesWholeSurrogateOracle) {
  Rng r(19);
  for (int rep = 0; rep < 6; ++rep) {
    const Scenario scen = testing::small_scenario(r);
    const Trajectory traj = testing::jiggled_line(r, scen, 0.75);
    const PowerPlan plan = testing::random_plan(r, scen);
    const Distances d = compute_distances(traj, scen);
    AdmmConfig cfg;
    cfg.eps = 1e-9;
    cfg.max_iter = 200000;
    const AdmmResult res = admm_run(traj, d.dI2, d.dE2, plan, scen, cfg);
    ASSERT_TRUE(res.converged);
    const oracle::TrajectoryOracleResult o =
        oracle::trajectory_surrogate_oracle(traj, plan, scen);
    const double v = oracle::trajectory_surrogate_value(traj, plan, scen, res.traj);
    EXPECT_LE(std::abs(rel_gap(o.value, v)), 1e-4);
    const SurrogateCoeffs c = build_surrogate(traj, d.dI2, d.dE2, plan, scen);
    EXPECT_NEAR(surrogate_at(c, res.traj), v, 1e-9 * (1 + std::abs(v)));
    EXPECT_TRUE(check_trajectory(res.traj, scen).all_passed());
  }
}

TEST(AdmmRun, SurrogateIsTightAtLinearizationPoint) {
  Rng r(23);
  const Scenario scen = testing::small_scenario(r);
  const Trajectory traj = testing::jiggled_line(r, scen, 0.75);
  const PowerPlan plan = testing::random_plan(r, scen);
  const Distances d = compute_distances(traj, scen);
  const SurrogateCoeffs c = build_surrogate(traj, d.dI2, d.dE2, plan, scen);
  const SecrecyRates rates = secrecy_rate(traj, plan, scen);
  EXPECT_NEAR(surrogate_lower_bound(c, d.dI2, d.dE2),
              rates.unclamped_average * scen.T, 1e-9);
}

TEST(AdmmRun, NominalConvergesWellUnderTwoThousandIterations) {
  const Scenario scen = Scenario::nominal();
  Trajectory traj;
  PowerPlan plan;
  initialize(scen, Scheme::kFull, traj, plan);
  const PowerStepResult ps = power_step(traj, to_split(plan), scen);
  const PowerPlan stepped = to_plan(ps.split);
  const Distances d = compute_distances(traj, scen);
  const AdmmResult res = admm_run(traj, d.dI2, d.dE2, stepped, scen);
  EXPECT_TRUE(res.converged);
  EXPECT_LT(res.iterations, 2000);
  EXPECT_TRUE(check_trajectory(res.traj, scen).all_passed());
}

TEST(AdmmRun, ZeroPowerStaysFeasible) {
  const Scenario scen = Scenario::nominal();
  const Trajectory traj = straight_line(scen);
  const Distances d = compute_distances(traj, scen);
  const AdmmResult res =
      admm_run(traj, d.dI2, d.dE2, PowerPlan(scen.T), scen);
  EXPECT_TRUE(res.converged);
  EXPECT_TRUE(check_trajectory(res.traj, scen).all_passed());
}

TEST(Repair, RestoresSpeedAndEnergy) {
  const Scenario scen = Scenario::nominal();
  Trajectory bad = straight_line(scen);
  bad.x[40] += 50;
  bad.y[41] -= 80;
  bool changed = false;
  const Trajectory fixed = repair_trajectory(bad, scen, &changed);
  EXPECT_TRUE(changed);
  EXPECT_TRUE(check_trajectory(fixed, scen).all_passed());

  changed = true;
  const Trajectory same = repair_trajectory(straight_line(scen), scen, &changed);
  EXPECT_FALSE(changed);
}

TEST(Repair, InfeasibleStraightLineThrows) {
  Scenario scen = Scenario::nominal();
  scen.E_tr = 1000;
  EXPECT_THROW(repair_trajectory(straight_line(scen), scen),
               InfeasibleScenario);
}

}  // namespace
}  // namespace uavsec
