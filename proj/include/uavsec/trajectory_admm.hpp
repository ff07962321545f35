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

// Trajectory block for fixed power: a concave surrogate in the auxiliary
// bounds u >= dI2 and t <= (linearized) dE2, solved by a two-group ADMM
// over four copies of the trajectory.
//
// Copies and the constraint each one carries:
//   xbar  speed ball      |x[k] - xbar[k+1]| <= step
//   xtil  distance bounds u[k] >= |xtil[k]|^2 + H^2, t[k] <= lin(xtil[k])
//   xhat  bridge between x and xddot
//   xddot energy budget   sum_k |xddot[k] - xddot[k+1]|^2 <= E_tr / kappa
//
// Multipliers (unscaled, appearing as m / delta in the penalty terms):
//   lam: x = xbar,  omg: x = xtil,  eta: x = xhat,  the: xhat = xddot.
//
// Group 1 (0-based slots) holds x[odd], xbar/xtil/u/t/xhat[even] and all of
// xddot.  Group 2 holds x[even] and xbar/xtil/u/t/xhat[odd].  Within a group
// every block is independent: speed pairs {x[k], xbar[k+1]}, distance slots
// {xtil[k], u[k], t[k]}, and (group 1 only) the energy block
// {xhat[even], xddot}.  Slot 0 and slot T-1 are pinned in every copy.

#pragma once

#include <optional>
#include <span>
#include <vector>

#include "uavsec/scenario.hpp"

namespace uavsec {

struct Point2 {
  double x = 0;
  double y = 0;
};

// Coefficients of the concave surrogate for one trajectory step, in area
// units (powers scaled by gamma0 / sigma2 so that everything is in m^2).
struct SurrogateCoeffs {
  std::vector<double> a_coef;   // slope of the Bob term in u [1/m^2]
  std::vector<double> t_lin;    // 1 / (t_f + pi), slope of the Eve term in t
  std::vector<double> info;     // alpha = gamma0 p rho / sigma2 [m^2]
  std::vector<double> noise;    // beta = gamma0 p (1 - rho) / sigma2 [m^2]
  std::vector<double> x_f, y_f, u_f, t_f;
  double L = 0;
  double H = 0;

  std::size_t size() const { return a_coef.size(); }
  // A slot with no information power contributes nothing to the rate.
  bool active(std::size_t i) const { return info[i] > 0; }
  // Linearized squared distance to Eve around (x_f, y_f); a lower bound on
  // the true squared distance.
  double eve_bound(std::size_t i, double x, double y) const;
};

// Throws NumericError if u_f <= 0 or a log argument is not positive.
SurrogateCoeffs build_surrogate(const Trajectory& traj_f,
                                std::span<const double> u_f,
                                std::span<const double> t_f,
                                const PowerPlan& plan, const Scenario& scen);

// sum_i [-A u - B t + log(beta + t)] over active slots (constants dropped).
double surrogate_objective(const SurrogateCoeffs& c, std::span<const double> u,
                           std::span<const double> t);

// The surrogate with its constants restored, in nats summed over slots.  It
// is a lower bound of
//   sum_i log(1 + alpha/u) - log(1 + alpha / (beta + t))
// and equals it at (u_f, t_f).
double surrogate_lower_bound(const SurrogateCoeffs& c,
                             std::span<const double> u,
                             std::span<const double> t);

// Surrogate lower bound at a trajectory, with u = dI2 and t set to its best
// feasible value.  Returns -inf if the Eve bound leaves the log domain.
double surrogate_at(const SurrogateCoeffs& c, const Trajectory& traj);

// ---------------------------------------------------------------------------
// Block kernels.

// max  -(d/2) sum_{c in xbar,xtil,xhat} |x - c - m_c/d|^2
//      -(d/2) |x_next - xbar_next - lam_next/d|^2
// s.t. |x - xbar_next| <= radius.
struct SpeedPairProblem {
  Point2 xbar, xtil, xhat;  // copies at slot k
  Point2 lam, omg, eta;     // their multipliers at slot k
  Point2 x_next;            // consensus x[k + 1]
  Point2 lam_next;          // multiplier of x[k + 1] = xbar[k + 1]
  double delta = 1;
  double radius = 1;
  std::optional<Point2> pinned_x;     // x[k] is an endpoint
  std::optional<Point2> pinned_xbar;  // xbar[k + 1] is an endpoint
};

struct SpeedPairSolution {
  Point2 x;
  Point2 xbar_next;
  double mu = 0;  // multiplier of the speed ball
};

double speed_pair_objective(const SpeedPairProblem& p, Point2 x,
                            Point2 xbar_next);
SpeedPairSolution solve_speed_pair(const SpeedPairProblem& p);

// max  -A u - B t + log(beta + t) - (d/2) |x - xtil - omg/d|^2
// s.t. u >= |xtil|^2 + H^2,  t <= eve_bound(xtil).
// Inactive slots keep only the penalty term.
struct DistanceSlotProblem {
  Point2 x;    // consensus position
  Point2 omg;  // multiplier of x = xtil
  double delta = 1;
  double a_coef = 0;
  double t_lin = 0;
  double noise = 0;
  bool active = true;
  Point2 lin_at;  // (x_f, y_f)
  double L = 0;
  double H = 0;
  std::optional<Point2> pinned;
};

struct DistanceSlotSolution {
  Point2 xtil;
  double u = 0;
  double t = 0;
  double mu = 0;  // multiplier of the Eve bound
};

double distance_bound(const DistanceSlotProblem& p, Point2 xtil);
double distance_slot_objective(const DistanceSlotProblem& p, Point2 xtil,
                               double u, double t);
// Throws NumericError when the multiplier quadratic has no real root.
DistanceSlotSolution solve_distance_slot(const DistanceSlotProblem& p);

// ---------------------------------------------------------------------------
// ADMM state and iteration.

enum class Group { kFirst, kSecond };

struct AdmmState {
  std::vector<double> x, y;
  std::vector<double> xbar, ybar;
  std::vector<double> xtil, ytil;
  std::vector<double> xhat, yhat;
  std::vector<double> xddot, yddot;
  std::vector<double> u, t;
  std::vector<double> lam_x, lam_y;
  std::vector<double> omg_x, omg_y;
  std::vector<double> eta_x, eta_y;
  std::vector<double> the_x, the_y;
  double delta = 1;

  std::size_t size() const { return x.size(); }
};

// Every copy equal to traj, u/t at the given values, multipliers zero.
AdmmState initial_state(const Trajectory& traj, std::span<const double> u,
                        std::span<const double> t, double delta);

// Surrogate objective minus all penalty terms.
double augmented_lagrangian(const AdmmState& s, const SurrogateCoeffs& c);

struct EnergyBlockResult {
  std::vector<double> xddot, yddot;
  std::vector<double> xhat, yhat;  // only group-1 (even) slots are updated
  double phi = 0;                  // multiplier of the energy budget
};

// Group-1 energy block: eliminates xhat[even], solves the tridiagonal
// stationarity system in xddot for a multiplier phi and bisects phi until
// the budget holds with complementary slackness.
EnergyBlockResult solve_energy_block(const AdmmState& s, double budget);

// Group-1 side of every cross-group copy constraint, indexed by slot, as
// read by the group-2 solves and the dual update.  For x = xbar at odd j this
// is x[j], at even j it is xbar[j]; likewise for xtil and xhat.  dd holds
// xddot at odd j (xhat = xddot at even j lies inside group 1).  With
// relaxation alpha each entry is alpha * (group-1 value) + (1 - alpha) *
// (current group-2 value); alpha = 1 is plain ADMM.
struct CouplingView {
  std::vector<double> bar_x, bar_y;
  std::vector<double> til_x, til_y;
  std::vector<double> hat_x, hat_y;
  std::vector<double> dd_x, dd_y;
};
// Call between the group-1 and group-2 sweeps.
CouplingView coupling_view(const AdmmState& s, double alpha);

// Without a view the group-2 solves read the state directly.
void type1_solve(AdmmState& s, Group g, const Scenario& scen,
                 const CouplingView* view = nullptr);
void type2_solve(AdmmState& s, Group g, const SurrogateCoeffs& c,
                 const Scenario& scen, const CouplingView* view = nullptr);
void type3_solve(AdmmState& s, Group g, const Scenario& scen,
                 const CouplingView* view = nullptr);
void dual_update(AdmmState& s, const CouplingView* view = nullptr);

struct Residuals {
  double r_norm = 0;  // copy mismatch
  double s_norm = 0;  // delta * change of group-2 variables through coupling
};
Residuals residuals(const AdmmState& prev, const AdmmState& cur);

struct AdmmConfig {
  double delta = 1.0;
  // When positive, the penalty is set to delta_scale * max_i A_i instead of
  // delta, tying it to the curvature of the Bob term.  Falls back to delta
  // when every slot is inactive.
  double delta_scale = 15;
  double relaxation = 1.6;  // over-relaxation alpha in (0, 2); 1 is plain
  double eps = 0;  // <= 0 selects 1e-4 * sqrt(8 T)
  int max_iter = 5000;
  // Residual balancing: scale delta by penalty_scale when one residual
  // exceeds balance_ratio times the other.
  bool adaptive_penalty = false;
  double balance_ratio = 10;
  double penalty_scale = 2;
  int adapt_every = 1;
  bool record_residuals = true;
};

double default_eps(int T);
// Penalty actually used for a given surrogate.
double initial_penalty(const SurrogateCoeffs& c, const AdmmConfig& cfg);

struct AdmmResult {
  Trajectory traj;
  std::vector<double> u, t;
  int iterations = 0;
  bool converged = false;
  bool repaired = false;
  Residuals last;
  double final_delta = 0;
  std::vector<double> r_trace, s_trace;
  AdmmState final_state;
};

// Pins the endpoints and, if speed or energy is violated, shrinks the
// displacement from the straight line until the trajectory is feasible.
// Throws InfeasibleScenario if the straight line itself is infeasible.
Trajectory repair_trajectory(const Trajectory& traj, const Scenario& scen,
                             bool* changed = nullptr);

// Solves the trajectory surrogate linearized at (traj_f, u_f, t_f) with the
// power plan held fixed.  If warm is given, its multipliers seed the run (the
// copies still start at traj_f).  Throws ConvergenceError if max_iter is
// reached with residuals above 10 eps.
AdmmResult admm_run(const Trajectory& traj_f, std::span<const double> u_f,
                    std::span<const double> t_f, const PowerPlan& plan,
                    const Scenario& scen, const AdmmConfig& cfg = {},
                    const AdmmState* warm = nullptr);

}  // namespace uavsec
