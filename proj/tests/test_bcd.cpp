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

#include <cmath>
#include <map>

#include "uavsec/bcd.hpp"

namespace uavsec {
namespace {

// Nominal runs are shared between tests; each scheme is solved once.
const RunReport& nominal_run(Scheme scheme) {
  static std::map<Scheme, RunReport> cache;
  auto it = cache.find(scheme);
  if (it == cache.end()) {
    it = cache.emplace(scheme, bcd_run(Scenario::nominal(), scheme)).first;
  }
  return it->second;
}

TEST(SchemeNames, RoundTrip) {
  for (Scheme s : {Scheme::kFull, Scheme::kFixedTrajectory,
                   Scheme::kNoPowerSplit, Scheme::kNoArtificialNoise}) {
    EXPECT_EQ(parse_scheme(scheme_name(s)), s);
  }
  EXPECT_FALSE(parse_scheme("FULL").has_value());
  EXPECT_FALSE(parse_scheme("").has_value());
}

TEST(Initialize, StraightLineAtAveragePower) {
  const Scenario scen = Scenario::nominal();
  Trajectory traj;
  PowerPlan plan;
  initialize(scen, Scheme::kNoArtificialNoise, traj, plan);
  ASSERT_EQ(plan.size(), static_cast<std::size_t>(scen.T));
  for (int i = 0; i < scen.T; ++i) {
    EXPECT_DOUBLE_EQ(plan.p[i], scen.P_bar);
    EXPECT_EQ(plan.rho[i], 1.0);
  }
  initialize(scen, Scheme::kFull, traj, plan);
  EXPECT_EQ(plan.rho[7], 0.5);
  EXPECT_TRUE(check_feasibility(traj, plan, scen).all_passed());
}

TEST(Bcd, FullSchemeTraceIsMonotone) {
  const RunReport& rep = nominal_run(Scheme::kFull);
  ASSERT_GE(rep.objective_trace.size(), 2u);
  for (std::size_t i = 1; i < rep.objective_trace.size(); ++i) {
    EXPECT_GE(rep.objective_trace[i], rep.objective_trace[i - 1] - 1e-12);
  }
  EXPECT_TRUE(rep.converged);
  EXPECT_LE(rep.outer_iterations, 20);
  EXPECT_TRUE(rep.feasibility.all_passed()) << rep.feasibility.summary();
  EXPECT_EQ(rep.admm_iterations.size(),
            static_cast<std::size_t>(rep.outer_iterations));
}

TEST(Bcd, FinalRateMatchesPlan) {
  const RunReport& rep = nominal_run(Scheme::kFull);
  const Scenario scen = Scenario::nominal();
  const SecrecyRates r = secrecy_rate(rep.traj, rep.plan, scen);
  EXPECT_NEAR(rep.final_rate, nats_to_bits(r.average), 1e-12);
  EXPECT_GE(rep.final_rate, rep.final_unclamped - 1e-12);
}

TEST(Bcd, FullSchemeDominatesBaselines) {
  const double full = nominal_run(Scheme::kFull).final_rate;
  const double ft = nominal_run(Scheme::kFixedTrajectory).final_rate;
  const double nps = nominal_run(Scheme::kNoPowerSplit).final_rate;
  const double noan = nominal_run(Scheme::kNoArtificialNoise).final_rate;
  EXPECT_GE(full, ft);
  EXPECT_GE(full, nps);
  EXPECT_GE(full, noan);
  EXPECT_GT(full, 0.0);
}

TEST(Bcd, FixedTrajectoryNeverMoves) {
  const RunReport& rep = nominal_run(Scheme::kFixedTrajectory);
  const Trajectory line = straight_line(Scenario::nominal());
  EXPECT_EQ(rep.traj.x, line.x);
  EXPECT_EQ(rep.traj.y, line.y);
  EXPECT_TRUE(rep.admm_iterations.empty());
  EXPECT_EQ(rep.times.trajectory_ms, 0.0);
}

TEST(Bcd, FixedSplitsAreKept) {
  const RunReport& nps = nominal_run(Scheme::kNoPowerSplit);
  const RunReport& noan = nominal_run(Scheme::kNoArtificialNoise);
  for (std::size_t i = 0; i < nps.plan.size(); ++i) {
    if (nps.plan.p[i] > 0) {
      EXPECT_NEAR(nps.plan.rho[i], 0.5, 1e-12);
    }
    if (noan.plan.p[i] > 0) {
      EXPECT_EQ(noan.plan.rho[i], 1.0);
    }
  }
}

TEST(Bcd, RepeatedRunsAreIdentical) {
  Scenario scen = Scenario::nominal();
  scen.T = 120;
  scen.xT = 400;
  BcdConfig cfg;
  cfg.max_outer = 4;
  const RunReport a = bcd_run(scen, Scheme::kFull, cfg);
  const RunReport b = bcd_run(scen, Scheme::kFull, cfg);
  EXPECT_EQ(a.objective_trace, b.objective_trace);
  EXPECT_EQ(a.traj.x, b.traj.x);
  EXPECT_EQ(a.plan.p, b.plan.p);
  EXPECT_EQ(a.admm_iterations, b.admm_iterations);
}

TEST(Bcd, ZeroAveragePowerGivesZeroRate) {
  Scenario scen = Scenario::nominal();
  scen.P_bar = 0;
  const RunReport rep = bcd_run(scen, Scheme::kFull);
  EXPECT_EQ(rep.final_rate, 0.0);
  for (double p : rep.plan.p) EXPECT_EQ(p, 0.0);
  EXPECT_TRUE(rep.feasibility.all_passed());
}

TEST(Bcd, NoNoiseWithColocatedEveGivesZero) {
  Scenario scen = Scenario::nominal();
  scen.L = 0;
  scen.T = 120;
  scen.xT = 400;
  const RunReport rep = bcd_run(scen, Scheme::kNoArtificialNoise);
  EXPECT_NEAR(rep.final_rate, 0.0, 1e-12);
  EXPECT_TRUE(rep.feasibility.all_passed());
}

TEST(Bcd, InfeasibleStraightLineThrows) {
  Scenario scen = Scenario::nominal();
  scen.E_tr = 1000;
  EXPECT_THROW(bcd_run(scen, Scheme::kFull), InfeasibleScenario);
}

}  // namespace
}  // namespace uavsec
