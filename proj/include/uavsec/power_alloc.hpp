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

// Power allocation for a fixed trajectory.
//
// The per-slot rate g(a, b) is a difference of concave functions of the
// information power a and the artificial-noise power b.  Linearizing the
// subtracted term at a feasible point (a_f, b_f) gives a concave minorant
// g_hat that is tight at (a_f, b_f).  The resulting problem
//
//   max  sum_i g_hat_i(a_i, b_i)
//   s.t. a_i, b_i >= 0,  a_i + b_i <= P_max,  sum_i (a_i + b_i) <= T P_bar
//
// is solved through its Lagrange dual in the total-power multiplier lambda:
// every slot decouples and has a closed-form maximizer, and lambda is found
// by bisection on the subgradient P - sum_i (a_i + b_i).

#pragma once

#include <optional>
#include <span>
#include <vector>

#include "uavsec/scenario.hpp"

namespace uavsec {

struct SlotGeometry {
  double dI2 = 0;
  double dE2 = 0;
};

// Linearization point of the concave-convex surrogate for one slot.
struct SurrogatePoint {
  double a_f = 0;
  double b_f = 0;
};

// Concave minorant g_hat(a, b; a_f, b_f) of secrecy_gap.  Throws
// NumericError if a log argument is not positive.
double surrogate_value(double a, double b, const SlotGeometry& slot,
                       const SurrogatePoint& pt, const LinkConstants& link);

// Maximizer over 0 <= b <= p_max - a of g_hat(a, b) - lambda (a + b).
double inner_b(double a, const SlotGeometry& slot, const SurrogatePoint& pt,
               double lambda, double p_max, const LinkConstants& link);

struct SlotSolution {
  double a = 0;
  double b = 0;
  double value = 0;  // g_hat(a, b) - lambda (a + b)
};

// Global maximizer of g_hat(a, b) - lambda (a + b) over the triangle
// a, b >= 0, a + b <= p_max, by enumerating the stationary and boundary
// candidates.  Ties resolve to smaller a, then smaller b.
SlotSolution solve_slot(const SlotGeometry& slot, const SurrogatePoint& pt,
                        double lambda, double p_max, const LinkConstants& link);

// Same objective restricted to a = rho p, b = (1 - rho) p, 0 <= p <= p_max.
SlotSolution solve_slot_fixed_split(const SlotGeometry& slot,
                                    const SurrogatePoint& pt, double rho,
                                    double lambda, double p_max,
                                    const LinkConstants& link);

struct DualEvaluation {
  double value = 0;  // d(lambda)
  double total = 0;  // sum_i (a_i + b_i) at the maximizers
  SplitPower split;
};

// d(lambda) = max sum_i [g_hat_i - lambda (a_i + b_i)] + lambda P over the
// per-slot triangles.  With fixed_rho set, slots are restricted to that
// information fraction.
DualEvaluation eval_dual(double lambda, std::span<const SlotGeometry> slots,
                         std::span<const SurrogatePoint> pts,
                         const Scenario& scen,
                         std::optional<double> fixed_rho = std::nullopt);

struct PowerStepOptions {
  std::optional<double> fixed_rho;
  double lambda_init = 1.0;    // first right bracket [nats/W]
  int max_doublings = 200;
  double power_rel_tol = 1e-12;  // stop when P - sum(a + b) <= tol * P
  double lambda_rel_tol = 1e-15;  // or when the bracket is this narrow
};

struct PowerStepResult {
  SplitPower split;
  double lambda = 0;
  double total = 0;
  double surrogate = 0;  // sum_i g_hat_i at split
  int dual_evaluations = 0;
};

std::vector<SlotGeometry> slot_geometry(const Trajectory& traj,
                                        const Scenario& scen);

// One concave-convex step for the power block: maximizes the surrogate
// linearized at `point`.  The returned split never exceeds the total power
// budget.
PowerStepResult power_step(const Trajectory& traj, const SplitPower& point,
                           const Scenario& scen,
                           const PowerStepOptions& options = {});

}  // namespace uavsec
