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

// Random instance generators shared by the unit and acceptance tests.  All
// draws are in the physical range of the nominal setup: positions within a
// few hundred metres, powers around 1 mW, penalties around the curvature of
// the Bob term.

#pragma once

#include <cmath>
#include <random>

#include "uavsec/oracle.hpp"
#include "uavsec/power_alloc.hpp"
#include "uavsec/scenario.hpp"
#include "uavsec/trajectory_admm.hpp"

namespace uavsec::testing {

class Rng {
 public:
  explicit Rng(std::uint64_t seed) : gen_(seed) {}
  double uniform(double lo = 0, double hi = 1) {
    return std::uniform_real_distribution<double>(lo, hi)(gen_);
  }
  double log_uniform(double lo, double hi) {
    return std::exp(uniform(std::log(lo), std::log(hi)));
  }
  bool chance(double p) { return uniform() < p; }
  Point2 point(double half_width) {
    return {uniform(-half_width, half_width), uniform(-half_width, half_width)};
  }

 private:
  std::mt19937_64 gen_;
};

inline oracle::SlotInstance random_slot(Rng& r, const Scenario& scen) {
  oracle::SlotInstance s;
  s.snr_per_watt = scen.link().snr_per_watt();
  s.p_max = scen.P_max * r.uniform(0.2, 2.2);
  const double x = r.uniform(-300, 1100);
  const double y = r.uniform(-300, 300);
  s.dI2 = x * x + y * y + scen.H * scen.H;
  s.dE2 = (x - scen.L) * (x - scen.L) + y * y + scen.H * scen.H;
  s.a_f = r.uniform(0, 0.5) * s.p_max;
  s.b_f = r.uniform(0, 0.5) * s.p_max;
  s.lambda = r.chance(0.3) ? 0.0 : r.log_uniform(0.1, 1e4);
  return s;
}

inline SpeedPairProblem random_speed_pair(Rng& r, double radius) {
  SpeedPairProblem p;
  p.delta = r.log_uniform(1e-4, 1.0);
  p.radius = radius;
  // Half the draws keep the targets close (ball inactive), half spread them.
  const double spread = r.chance(0.5) ? radius : 10 * radius;
  p.xbar = r.point(spread);
  p.xtil = r.point(spread);
  p.xhat = r.point(spread);
  p.x_next = r.point(spread);
  const double m = p.delta * spread;
  p.lam = r.point(m);
  p.omg = r.point(m);
  p.eta = r.point(m);
  p.lam_next = r.point(m);
  return p;
}

// An active, unpinned distance slot with coefficients from a random power
// split at a random linearization point.
inline DistanceSlotProblem random_distance_slot(Rng& r, const Scenario& scen) {
  DistanceSlotProblem p;
  p.L = scen.L;
  p.H = scen.H;
  const double xf = r.uniform(-300, 1100);
  const double yf = r.uniform(-300, 300);
  p.lin_at = {xf, yf};
  const double k = scen.link().snr_per_watt();
  const double pw = scen.P_max * r.uniform(0.01, 1.0);
  const double rho = r.uniform(0.05, 1.0);
  const double alpha = k * pw * rho;
  const double beta = k * pw * (1 - rho);
  const double u_f = xf * xf + yf * yf + p.H * p.H;
  const double t_f = (xf - p.L) * (xf - p.L) + yf * yf + p.H * p.H;
  p.a_coef = alpha / (u_f * (u_f + alpha));
  p.t_lin = 1.0 / (t_f + alpha + beta);
  p.noise = beta;
  p.delta = 15 * p.a_coef * r.log_uniform(0.1, 10);
  p.x = {xf + r.uniform(-10, 10), yf + r.uniform(-10, 10)};
  p.omg = {r.uniform(-5, 5) * p.delta, r.uniform(-5, 5) * p.delta};
  return p;
}

struct EnergyInstance {
  AdmmState state;
  double budget = 0;
};

// A perturbed ADMM state around a 3 m/step line; the budget is either
// slightly above the straight-line floor (binding) or generous.
inline EnergyInstance random_energy_instance(Rng& r, int T) {
  Trajectory tr(T);
  for (int i = 0; i < T; ++i) {
    tr.x[i] = 3.0 * i + r.uniform(-2, 2);
    tr.y[i] = r.uniform(-2, 2);
  }
  tr.x.front() = 0;
  tr.y.front() = 0;
  tr.x.back() = 3.0 * (T - 1);
  tr.y.back() = 0;
  std::vector<double> u(T, 1e4), t(T, 1e4);
  EnergyInstance inst;
  inst.state = initial_state(tr, u, t, r.log_uniform(1e-3, 1.0));
  AdmmState& s = inst.state;
  auto jiggle = [&](std::vector<double>& v, double a) {
    for (double& e : v) e += r.uniform(-a, a);
  };
  jiggle(s.x, 3);
  jiggle(s.y, 3);
  jiggle(s.xhat, 3);
  jiggle(s.yhat, 3);
  for (auto* v : {&s.eta_x, &s.eta_y, &s.the_x, &s.the_y}) {
    jiggle(*v, 2 * s.delta);
  }
  const double floor = 9.0 * (T - 1);
  inst.budget = floor * (r.chance(0.7) ? 1.0001 + r.uniform(0, 0.5)
                                       : r.uniform(5, 20));
  return inst;
}

// A short-route scenario with T = 8 whose straight line is strictly inside
// the speed and energy limits.
inline Scenario small_scenario(Rng& r) {
  Scenario s = Scenario::nominal();
  s.T = 8;
  s.x1 = r.uniform(-15, -5);
  s.y1 = r.uniform(-5, 0);
  s.xT = r.uniform(5, 15);
  s.yT = r.uniform(0, 5);
  s.L = r.uniform(20, 100);
  s.H = r.uniform(50, 100);
  s.E_tr = r.uniform(150, 450);
  return s;
}

inline Trajectory jiggled_line(Rng& r, const Scenario& s, double amp) {
  Trajectory t = straight_line(s);
  for (std::size_t i = 1; i + 1 < t.size(); ++i) {
    t.x[i] += r.uniform(-amp, amp);
    t.y[i] += r.uniform(-amp, amp);
  }
  return t;
}

inline PowerPlan random_plan(Rng& r, const Scenario& s) {
  PowerPlan p(s.T);
  for (int i = 0; i < s.T; ++i) {
    p.p[i] = s.P_bar * r.uniform(0.2, 1.8);
    p.rho[i] = r.uniform(0, 1);
  }
  return p;
}

}  // namespace uavsec::testing
