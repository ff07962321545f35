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

// Slow reference solvers for the test suites.  Nothing here calls into the
// power or trajectory solvers: the objectives are rebuilt from the physics
// and solved by brute force (grids, projected gradient, log-barrier Newton).
// Only the scenario model and plain data structs are shared.

#pragma once

#include <Eigen/Dense>
#include <functional>
#include <optional>
#include <vector>

#include "uavsec/scenario.hpp"
#include "uavsec/trajectory_admm.hpp"

namespace uavsec::oracle {

struct OracleConfig {
  int grid_resolution = 1024;  // points per axis
  int refine_iters = 60;       // golden-section refinement cycles
  double pg_step = 0;          // <= 0 selects 1 / Lipschitz constant
  double pg_tol = 1e-13;       // relative step size at which PG stops
  int pg_max_iter = 200000;
};

class OracleFailure : public Error {
 public:
  using Error::Error;
};

// ---------------------------------------------------------------------------
// Per-slot power problem.

struct SlotInstance {
  double dI2 = 0;
  double dE2 = 0;
  double a_f = 0;
  double b_f = 0;
  double lambda = 0;
  double p_max = 0;
  double snr_per_watt = 0;  // gamma0 / sigma2
};

// g_hat(a, b) - lambda (a + b), written out from the rate expression.
double slot_value(const SlotInstance& s, double a, double b);

struct GridResult {
  double a = 0;
  double b = 0;
  double value = 0;
};

// Maximizes f over a, b >= 0, a + b <= p_max: dense grid, then cyclic golden
// sections along a, b and the hypotenuse direction.
GridResult grid_triangle_max(const std::function<double(double, double)>& f,
                             double p_max, const OracleConfig& cfg = {});

GridResult grid_slot_oracle(const SlotInstance& s, const OracleConfig& cfg = {});

// Same objective on the segment a = rho p, b = (1 - rho) p, p in [0, p_max].
GridResult fixed_split_oracle(const SlotInstance& s, double rho,
                              const OracleConfig& cfg = {});

// ---------------------------------------------------------------------------
// Speed pair by projected gradient.

struct PairResult {
  Point2 x;
  Point2 xbar_next;
  double value = 0;
  int iterations = 0;
};

double speed_pair_value(const SpeedPairProblem& p, Point2 x, Point2 z);
// Throws OracleFailure if pg_max_iter is reached.
PairResult pg_speed_pair_oracle(const SpeedPairProblem& p,
                                const OracleConfig& cfg = {});

// ---------------------------------------------------------------------------
// Log-quadratic programs:
//   max  -1/2 z'Qz + c'z + c0 + sum_k w_k log(a_k'z + b_k)
//   s.t. 1/2 z'P_j z + q_j'z + r_j <= 0
// with Q, P_j positive semidefinite and w_k >= 0.

struct LogTerm {
  Eigen::VectorXd a;
  double b = 0;
  double weight = 1;
};

struct QuadConstraint {
  Eigen::MatrixXd P;  // empty for a linear constraint
  Eigen::VectorXd q;
  double r = 0;

  double value(const Eigen::VectorXd& z) const;
  Eigen::VectorXd gradient(const Eigen::VectorXd& z) const;
};

struct LogQuadProgram {
  int n = 0;
  Eigen::MatrixXd Q;
  Eigen::VectorXd c;
  double c0 = 0;
  std::vector<LogTerm> logs;
  std::vector<QuadConstraint> cons;

  explicit LogQuadProgram(int dim = 0);
  // -inf outside the log domain.
  double objective(const Eigen::VectorXd& z) const;
  Eigen::VectorXd gradient(const Eigen::VectorXd& z) const;
  Eigen::MatrixXd hessian(const Eigen::VectorXd& z) const;
  double max_violation(const Eigen::VectorXd& z) const;
};

struct BarrierOptions {
  double t0 = 1.0;
  double growth = 10.0;
  double gap_tol = 1e-10;     // stop when (#constraints) / t <= gap_tol
  double newton_tol = 1e-14;  // half squared Newton decrement
  int max_newton = 200;       // per centering step
};

struct BarrierResult {
  Eigen::VectorXd z;
  double value = 0;
  Eigen::VectorXd mu;  // multiplier estimates 1 / (t (-g_j))
  int newton_steps = 0;
};

// z0 must be strictly feasible and inside the log domain.
BarrierResult barrier_maximize(const LogQuadProgram& prog,
                               const Eigen::VectorXd& z0,
                               const BarrierOptions& opt = {});

// ---------------------------------------------------------------------------
// KKT certification.

struct KktReport {
  double stationarity = 0;
  double primal = 0;
  double dual = 0;
  double slackness = 0;
  Eigen::VectorXd mu;  // multipliers used (estimated if none were given)
  double max() const;
};

// Each constraint is rescaled by max(1, |grad g_j(z)|_inf).  Stationarity is
// relative to 1 + |grad f|_inf, primal violation and slackness to
// 1 + |z|_inf.  Without multipliers, they are estimated by non-negative
// least squares over the constraints within active_tol of binding.
KktReport kkt_residual(const LogQuadProgram& prog, const Eigen::VectorXd& z,
                       std::optional<Eigen::VectorXd> mu = std::nullopt,
                       double active_tol = 1e-7);

// Lawson-Hanson: argmin |A x - b| subject to x >= 0.
Eigen::VectorXd nnls(const Eigen::MatrixXd& A, const Eigen::VectorXd& b,
                     int max_iter = 500);

// ---------------------------------------------------------------------------
// Programs for the trajectory blocks.  Variable layouts are documented at
// each builder.

// Distance slot over z = (xtil_x, xtil_y, u, t).  Requires p.active and no
// pinned position.
LogQuadProgram distance_slot_program(const DistanceSlotProblem& p);
// A strictly feasible starting point for it.
Eigen::VectorXd distance_slot_start(const DistanceSlotProblem& p);

// Speed pair over z = (x_x, x_y, z_x, z_y), both ends free.
LogQuadProgram speed_pair_program(const SpeedPairProblem& p);

// Group-1 energy block.  Variables, in order: xddot[1..n-2] (x then y
// coordinate interleaved per slot), then xhat at the even interior slots
// (interleaved the same way).  xddot endpoints and xhat elsewhere are data.
struct EnergyProgram {
  LogQuadProgram prog;
  std::vector<std::size_t> dd_slots;
  std::vector<std::size_t> hat_slots;
  Eigen::VectorXd pack(const AdmmState& s) const;
  Eigen::VectorXd start(const AdmmState& s) const;
};
EnergyProgram energy_block_program(const AdmmState& s, double budget);

// ---------------------------------------------------------------------------
// Whole surrogates at small T.

struct PowerOracleResult {
  std::vector<double> a, b;
  double value = 0;  // sum of per-slot surrogates (nats)
};
// Concave surrogate of the power block linearized at (a_f, b_f).
PowerOracleResult power_surrogate_oracle(const Trajectory& traj,
                                         const SplitPower& point,
                                         const Scenario& scen,
                                         const BarrierOptions& opt = {});

struct TrajectoryOracleResult {
  Trajectory traj;
  double value = 0;  // surrogate lower bound with constants (nats)
};
// Concave trajectory surrogate linearized at traj_f (u_f = dI2, t_f = dE2)
// with the plan held fixed.  traj_f must be strictly feasible.
TrajectoryOracleResult trajectory_surrogate_oracle(
    const Trajectory& traj_f, const PowerPlan& plan, const Scenario& scen,
    const BarrierOptions& opt = {});

// The same surrogate evaluated at a trajectory (u tight, t at its best).
double trajectory_surrogate_value(const Trajectory& traj_f,
                                  const PowerPlan& plan, const Scenario& scen,
                                  const Trajectory& traj);

}  // namespace uavsec::oracle
