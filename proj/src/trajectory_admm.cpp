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

#include "uavsec/trajectory_admm.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <sstream>

namespace uavsec {

namespace {

constexpr double kInf = std::numeric_limits<double>::infinity();

double sq(double v) { return v * v; }

double norm2(Point2 p) { return sq(p.x) + sq(p.y); }

Point2 project_to_ball(Point2 p, Point2 center, double radius) {
  const double dx = p.x - center.x;
  const double dy = p.y - center.y;
  const double d = std::hypot(dx, dy);
  if (d <= radius) return p;
  const double s = radius / d;
  return {center.x + s * dx, center.y + s * dy};
}

bool is_group_slot(Group g, std::size_t j) {
  return (j % 2 == 0) == (g == Group::kFirst);
}

}  // namespace

// ---------------------------------------------------------------------------
// Surrogate.

double SurrogateCoeffs::eve_bound(std::size_t i, double x, double y) const {
  const double ex = x_f[i] - L;
  const double ey = y_f[i];
  return sq(ex) + sq(ey) + H * H + 2.0 * ex * (x - x_f[i]) +
         2.0 * ey * (y - y_f[i]);
}

SurrogateCoeffs build_surrogate(const Trajectory& traj_f,
                                std::span<const double> u_f,
                                std::span<const double> t_f,
                                const PowerPlan& plan, const Scenario& scen) {
  const std::size_t n = traj_f.size();
  if (traj_f.y.size() != n || u_f.size() != n || t_f.size() != n ||
      plan.size() != n) {
    throw DimensionError("surrogate inputs differ in length");
  }
  const double k = scen.link().snr_per_watt();
  SurrogateCoeffs c;
  c.L = scen.L;
  c.H = scen.H;
  c.x_f = traj_f.x;
  c.y_f = traj_f.y;
  c.u_f.assign(u_f.begin(), u_f.end());
  c.t_f.assign(t_f.begin(), t_f.end());
  c.a_coef.resize(n);
  c.t_lin.resize(n);
  c.info.resize(n);
  c.noise.resize(n);
  for (std::size_t i = 0; i < n; ++i) {
    const double alpha = k * plan.p[i] * plan.rho[i];
    const double beta = k * plan.p[i] * (1.0 - plan.rho[i]);
    const double pi = alpha + beta;
    if (!(u_f[i] > 0)) throw NumericError("u_f must be positive");
    if (!(t_f[i] + pi > 0) || !(t_f[i] + beta > 0)) {
      throw NumericError("surrogate log argument is not positive");
    }
    c.info[i] = alpha;
    c.noise[i] = beta;
    c.a_coef[i] = alpha / (u_f[i] * (u_f[i] + alpha));
    c.t_lin[i] = 1.0 / (t_f[i] + pi);
  }
  return c;
}

double surrogate_objective(const SurrogateCoeffs& c, std::span<const double> u,
                           std::span<const double> t) {
  double sum = 0;
  for (std::size_t i = 0; i < c.size(); ++i) {
    if (!c.active(i)) continue;
    const double arg = c.noise[i] + t[i];
    if (!(arg > 0)) return -kInf;
    sum += -c.a_coef[i] * u[i] - c.t_lin[i] * t[i] + std::log(arg);
  }
  return sum;
}

double surrogate_lower_bound(const SurrogateCoeffs& c,
                             std::span<const double> u,
                             std::span<const double> t) {
  double sum = 0;
  for (std::size_t i = 0; i < c.size(); ++i) {
    if (!c.active(i)) continue;
    const double arg = c.noise[i] + t[i];
    if (!(arg > 0)) return -kInf;
    const double pi = c.info[i] + c.noise[i];
    sum += std::log1p(c.info[i] / c.u_f[i]) - c.a_coef[i] * (u[i] - c.u_f[i]) -
           std::log(pi + c.t_f[i]) - c.t_lin[i] * (t[i] - c.t_f[i]) +
           std::log(arg);
  }
  return sum;
}

double surrogate_at(const SurrogateCoeffs& c, const Trajectory& traj) {
  std::vector<double> u(c.size());
  std::vector<double> t(c.size());
  for (std::size_t i = 0; i < c.size(); ++i) {
    u[i] = sq(traj.x[i]) + sq(traj.y[i]) + c.H * c.H;
    const double best = 1.0 / c.t_lin[i] - c.noise[i];
    t[i] = std::min(best, c.eve_bound(i, traj.x[i], traj.y[i]));
  }
  return surrogate_lower_bound(c, u, t);
}

// ---------------------------------------------------------------------------
// Speed pair.

double speed_pair_objective(const SpeedPairProblem& p, Point2 x,
                            Point2 xbar_next) {
  const double d = p.delta;
  auto term = [d](Point2 a, Point2 b, Point2 m) {
    return sq(a.x - b.x - m.x / d) + sq(a.y - b.y - m.y / d);
  };
  return -0.5 * d *
         (term(x, p.xbar, p.lam) + term(x, p.xtil, p.omg) +
          term(x, p.xhat, p.eta) + term(p.x_next, xbar_next, p.lam_next));
}

SpeedPairSolution solve_speed_pair(const SpeedPairProblem& p) {
  const double d = p.delta;
  // Unconstrained maximizers of the x[k] and xbar[k+1] parts.
  const Point2 c1{(d * (p.xbar.x + p.xtil.x + p.xhat.x) + p.lam.x + p.omg.x +
                   p.eta.x) / (3.0 * d),
                  (d * (p.xbar.y + p.xtil.y + p.xhat.y) + p.lam.y + p.omg.y +
                   p.eta.y) / (3.0 * d)};
  const Point2 c2{p.x_next.x - p.lam_next.x / d, p.x_next.y - p.lam_next.y / d};

  SpeedPairSolution out;
  if (p.pinned_x && p.pinned_xbar) {
    out.x = *p.pinned_x;
    out.xbar_next = *p.pinned_xbar;
    return out;
  }
  if (p.pinned_x) {
    out.x = *p.pinned_x;
    out.xbar_next = project_to_ball(c2, out.x, p.radius);
    const double moved = std::sqrt(norm2({c2.x - out.xbar_next.x,
                                          c2.y - out.xbar_next.y}));
    out.mu = d * moved / (2.0 * p.radius);
    return out;
  }
  if (p.pinned_xbar) {
    out.xbar_next = *p.pinned_xbar;
    out.x = project_to_ball(c1, out.xbar_next, p.radius);
    const double moved = std::sqrt(norm2({c1.x - out.x.x, c1.y - out.x.y}));
    out.mu = 3.0 * d * moved / (2.0 * p.radius);
    return out;
  }

  if (norm2({c1.x - c2.x, c1.y - c2.y}) <= sq(p.radius)) {
    out.x = c1;
    out.xbar_next = c2;
    return out;
  }
  // Active ball: complementary slackness fixes the multiplier.
  const double vx = 3.0 * d * (c1.x - c2.x);
  const double vy = 3.0 * d * (c1.y - c2.y);
  const double big_a = d * d / sq(p.radius) * (sq(vx) + sq(vy));
  const double mu = std::max(0.0, (std::sqrt(big_a) - 3.0 * d * d) / (8.0 * d));
  const double kappa = 2.0 * mu * d / (2.0 * mu + d);
  out.mu = mu;
  out.x = {(3.0 * d * c1.x + kappa * c2.x) / (3.0 * d + kappa),
           (3.0 * d * c1.y + kappa * c2.y) / (3.0 * d + kappa)};
  out.xbar_next = {(2.0 * mu * out.x.x + d * c2.x) / (2.0 * mu + d),
                   (2.0 * mu * out.x.y + d * c2.y) / (2.0 * mu + d)};
  return out;
}

// ---------------------------------------------------------------------------
// Distance slot.

double distance_bound(const DistanceSlotProblem& p, Point2 xtil) {
  const double ex = p.lin_at.x - p.L;
  const double ey = p.lin_at.y;
  return sq(ex) + sq(ey) + p.H * p.H + 2.0 * ex * (xtil.x - p.lin_at.x) +
         2.0 * ey * (xtil.y - p.lin_at.y);
}

double distance_slot_objective(const DistanceSlotProblem& p, Point2 xtil,
                               double u, double t) {
  const double d = p.delta;
  const double pen = sq(p.x.x - xtil.x - p.omg.x / d) +
                     sq(p.x.y - xtil.y - p.omg.y / d);
  double value = -0.5 * d * pen;
  if (p.active) {
    if (!(p.noise + t > 0)) return -kInf;
    value += -p.a_coef * u - p.t_lin * t + std::log(p.noise + t);
  }
  return value;
}

DistanceSlotSolution solve_distance_slot(const DistanceSlotProblem& p) {
  DistanceSlotSolution out;
  const double h2 = p.H * p.H;
  // Unconstrained Eve-side optimum of -B t + log(beta + t).
  const double t_free = 1.0 / p.t_lin - p.noise;

  if (p.pinned) {
    out.xtil = *p.pinned;
    out.u = norm2(out.xtil) + h2;
    const double bound = distance_bound(p, out.xtil);
    if (!p.active) {
      out.t = bound;
      return out;
    }
    out.t = std::min(t_free, bound);
    if (out.t < t_free) {
      out.mu = std::max(0.0, 1.0 / (p.noise + out.t) - p.t_lin);
    }
    return out;
  }

  const double d = p.delta;
  const double gx = d * p.x.x - p.omg.x;
  const double gy = d * p.x.y - p.omg.y;
  if (!p.active) {
    out.xtil = {gx / d, gy / d};
    out.u = norm2(out.xtil) + h2;
    out.t = distance_bound(p, out.xtil);
    return out;
  }

  const double kk = 2.0 * p.a_coef + d;
  const double ex = p.lin_at.x - p.L;
  const double ey = p.lin_at.y;
  auto xtil_at = [&](double mu) {
    return Point2{(gx + 2.0 * mu * ex) / kk, (gy + 2.0 * mu * ey) / kk};
  };

  Point2 xt = xtil_at(0.0);
  if (t_free <= distance_bound(p, xt)) {
    out.xtil = xt;
    out.t = t_free;
    out.u = norm2(xt) + h2;
    return out;
  }

  // Eve bound active: 1 / (B + mu) - beta = bound(xtil(mu)), a quadratic
  // a_mu mu^2 + b_mu mu + c_mu = 0 with exactly one positive root.
  const double xf = p.lin_at.x;
  const double yf = p.lin_at.y;
  const double a_mu = 4.0 * (sq(ex) + sq(ey)) / kk;
  const double d_mu = -sq(xf) - sq(yf) + sq(p.L) + h2 + p.noise +
                      (2.0 * ex * gx + 2.0 * ey * gy) / kk;
  const double b_mu = a_mu * p.t_lin + d_mu;
  const double c_mu = d_mu * p.t_lin - 1.0;
  double mu;
  if (a_mu <= std::numeric_limits<double>::min()) {
    if (!(b_mu > 0)) throw NumericError("distance slot: degenerate Eve bound");
    mu = -c_mu / b_mu;
  } else {
    const double disc = b_mu * b_mu - 4.0 * a_mu * c_mu;
    if (disc < 0) {
      throw NumericError("distance slot: infeasible surrogate (negative "
                         "discriminant)");
    }
    const double root = std::sqrt(disc);
    mu = b_mu >= 0 ? (-2.0 * c_mu) / (b_mu + root)
                   : (-b_mu + root) / (2.0 * a_mu);
  }
  mu = std::max(0.0, mu);
  xt = xtil_at(mu);
  out.xtil = xt;
  out.mu = mu;
  out.u = norm2(xt) + h2;
  out.t = distance_bound(p, xt);
  if (!(p.noise + out.t > 0)) {
    throw NumericError("distance slot: Eve bound leaves the log domain");
  }
  return out;
}

// ---------------------------------------------------------------------------
// State.

AdmmState initial_state(const Trajectory& traj, std::span<const double> u,
                        std::span<const double> t, double delta) {
  const std::size_t n = traj.size();
  if (traj.y.size() != n || u.size() != n || t.size() != n) {
    throw DimensionError("ADMM initial state inputs differ in length");
  }
  AdmmState s;
  s.x = s.xbar = s.xtil = s.xhat = s.xddot = traj.x;
  s.y = s.ybar = s.ytil = s.yhat = s.yddot = traj.y;
  s.u.assign(u.begin(), u.end());
  s.t.assign(t.begin(), t.end());
  for (auto* v : {&s.lam_x, &s.lam_y, &s.omg_x, &s.omg_y, &s.eta_x, &s.eta_y,
                  &s.the_x, &s.the_y}) {
    v->assign(n, 0.0);
  }
  s.delta = delta;
  return s;
}

double augmented_lagrangian(const AdmmState& s, const SurrogateCoeffs& c) {
  const double d = s.delta;
  double pen = 0;
  for (std::size_t j = 0; j < s.size(); ++j) {
    pen += sq(s.x[j] - s.xbar[j] - s.lam_x[j] / d) +
           sq(s.y[j] - s.ybar[j] - s.lam_y[j] / d) +
           sq(s.x[j] - s.xtil[j] - s.omg_x[j] / d) +
           sq(s.y[j] - s.ytil[j] - s.omg_y[j] / d) +
           sq(s.x[j] - s.xhat[j] - s.eta_x[j] / d) +
           sq(s.y[j] - s.yhat[j] - s.eta_y[j] / d) +
           sq(s.xhat[j] - s.xddot[j] - s.the_x[j] / d) +
           sq(s.yhat[j] - s.yddot[j] - s.the_y[j] / d);
  }
  return surrogate_objective(c, s.u, s.t) - 0.5 * d * pen;
}

// ---------------------------------------------------------------------------
// Block sweeps.

CouplingView coupling_view(const AdmmState& s, double alpha) {
  const std::size_t n = s.size();
  CouplingView v;
  for (auto* a : {&v.bar_x, &v.bar_y, &v.til_x, &v.til_y, &v.hat_x, &v.hat_y,
                  &v.dd_x, &v.dd_y}) {
    a->assign(n, 0.0);
  }
  auto blend = [alpha](double g1, double g2) {
    return alpha * g1 + (1.0 - alpha) * g2;
  };
  for (std::size_t j = 0; j < n; ++j) {
    if (j % 2 == 1) {
      v.bar_x[j] = blend(s.x[j], s.xbar[j]);
      v.bar_y[j] = blend(s.y[j], s.ybar[j]);
      v.til_x[j] = blend(s.x[j], s.xtil[j]);
      v.til_y[j] = blend(s.y[j], s.ytil[j]);
      v.hat_x[j] = blend(s.x[j], s.xhat[j]);
      v.hat_y[j] = blend(s.y[j], s.yhat[j]);
      v.dd_x[j] = blend(s.xddot[j], s.xhat[j]);
      v.dd_y[j] = blend(s.yddot[j], s.yhat[j]);
    } else {
      v.bar_x[j] = blend(s.xbar[j], s.x[j]);
      v.bar_y[j] = blend(s.ybar[j], s.y[j]);
      v.til_x[j] = blend(s.xtil[j], s.x[j]);
      v.til_y[j] = blend(s.ytil[j], s.y[j]);
      v.hat_x[j] = blend(s.xhat[j], s.x[j]);
      v.hat_y[j] = blend(s.yhat[j], s.y[j]);
      v.dd_x[j] = s.xddot[j];
      v.dd_y[j] = s.yddot[j];
    }
  }
  return v;
}

void type1_solve(AdmmState& s, Group g, const Scenario& scen,
                 const CouplingView* view) {
  const std::size_t n = s.size();
  if (n < 2) return;
  if (g == Group::kFirst) view = nullptr;
  // Pair k couples x[k] with xbar[k+1]; group 1 owns odd k.
  const std::size_t first = g == Group::kFirst ? 1 : 0;
  for (std::size_t k = first; k + 1 < n; k += 2) {
    SpeedPairProblem p;
    if (view) {
      p.xbar = {view->bar_x[k], view->bar_y[k]};
      p.xtil = {view->til_x[k], view->til_y[k]};
      p.xhat = {view->hat_x[k], view->hat_y[k]};
      p.x_next = {view->bar_x[k + 1], view->bar_y[k + 1]};
    } else {
      p.xbar = {s.xbar[k], s.ybar[k]};
      p.xtil = {s.xtil[k], s.ytil[k]};
      p.xhat = {s.xhat[k], s.yhat[k]};
      p.x_next = {s.x[k + 1], s.y[k + 1]};
    }
    p.lam = {s.lam_x[k], s.lam_y[k]};
    p.omg = {s.omg_x[k], s.omg_y[k]};
    p.eta = {s.eta_x[k], s.eta_y[k]};
    p.lam_next = {s.lam_x[k + 1], s.lam_y[k + 1]};
    p.delta = s.delta;
    p.radius = scen.max_step();
    if (k == 0) p.pinned_x = Point2{scen.x1, scen.y1};
    if (k + 1 == n - 1) p.pinned_xbar = Point2{scen.xT, scen.yT};
    const SpeedPairSolution sol = solve_speed_pair(p);
    s.x[k] = sol.x.x;
    s.y[k] = sol.x.y;
    s.xbar[k + 1] = sol.xbar_next.x;
    s.ybar[k + 1] = sol.xbar_next.y;
  }
}

void type2_solve(AdmmState& s, Group g, const SurrogateCoeffs& c,
                 const Scenario& scen, const CouplingView* view) {
  const std::size_t n = s.size();
  if (g == Group::kFirst) view = nullptr;
  for (std::size_t j = 0; j < n; ++j) {
    if (!is_group_slot(g, j)) continue;
    DistanceSlotProblem p;
    p.x = view ? Point2{view->til_x[j], view->til_y[j]} : Point2{s.x[j], s.y[j]};
    p.omg = {s.omg_x[j], s.omg_y[j]};
    p.delta = s.delta;
    p.a_coef = c.a_coef[j];
    p.t_lin = c.t_lin[j];
    p.noise = c.noise[j];
    p.active = c.active(j);
    p.lin_at = {c.x_f[j], c.y_f[j]};
    p.L = scen.L;
    p.H = scen.H;
    if (j == 0) p.pinned = Point2{scen.x1, scen.y1};
    if (j == n - 1) p.pinned = Point2{scen.xT, scen.yT};
    const DistanceSlotSolution sol = solve_distance_slot(p);
    s.xtil[j] = sol.xtil.x;
    s.ytil[j] = sol.xtil.y;
    s.u[j] = sol.u;
    s.t[j] = sol.t;
  }
}

namespace {

// Solves (w_j + 4 phi) z_j - 2 phi (z_{j-1} + z_{j+1}) = w_j c_j for the
// interior slots with z_0 = start and z_{n-1} = end held fixed.
void solve_chain(const std::vector<double>& w, const std::vector<double>& cx,
                 const std::vector<double>& cy, double phi, Point2 start,
                 Point2 end, std::vector<double>& zx, std::vector<double>& zy,
                 std::vector<double>& scratch) {
  const std::size_t n = w.size();
  zx[0] = start.x;
  zy[0] = start.y;
  zx[n - 1] = end.x;
  zy[n - 1] = end.y;
  if (n <= 2) return;
  const double off = -2.0 * phi;
  // Thomas algorithm; scratch holds the modified super-diagonal.
  scratch.resize(n);
  double denom = w[1] + 4.0 * phi;
  scratch[1] = off / denom;
  const double far = n == 3 ? 1.0 : 0.0;  // slot 1 also touches the end
  zx[1] = (w[1] * cx[1] + 2.0 * phi * (start.x + far * end.x)) / denom;
  zy[1] = (w[1] * cy[1] + 2.0 * phi * (start.y + far * end.y)) / denom;
  for (std::size_t j = 2; j + 1 < n; ++j) {
    double rx = w[j] * cx[j];
    double ry = w[j] * cy[j];
    if (j + 2 == n) {
      rx += 2.0 * phi * end.x;
      ry += 2.0 * phi * end.y;
    }
    denom = w[j] + 4.0 * phi - off * scratch[j - 1];
    scratch[j] = off / denom;
    zx[j] = (rx - off * zx[j - 1]) / denom;
    zy[j] = (ry - off * zy[j - 1]) / denom;
  }
  for (std::size_t j = n - 3; j >= 1; --j) {
    zx[j] -= scratch[j] * zx[j + 1];
    zy[j] -= scratch[j] * zy[j + 1];
  }
}

double chain_energy(const std::vector<double>& zx,
                    const std::vector<double>& zy) {
  double e = 0;
  for (std::size_t j = 0; j + 1 < zx.size(); ++j) {
    e += sq(zx[j] - zx[j + 1]) + sq(zy[j] - zy[j + 1]);
  }
  return e;
}

}  // namespace

EnergyBlockResult solve_energy_block(const AdmmState& s, double budget) {
  const std::size_t n = s.size();
  const double d = s.delta;
  const Point2 start{s.xddot[0], s.yddot[0]};
  const Point2 end{s.xddot[n - 1], s.yddot[n - 1]};

  // Eliminating xhat[even] leaves a weight d/2 pull toward x - (eta+the)/d;
  // odd slots see the fixed xhat through a weight-d pull.
  std::vector<double> w(n), cx(n), cy(n);
  for (std::size_t j = 0; j < n; ++j) {
    if (j % 2 == 0) {
      w[j] = 0.5 * d;
      cx[j] = s.x[j] - (s.eta_x[j] + s.the_x[j]) / d;
      cy[j] = s.y[j] - (s.eta_y[j] + s.the_y[j]) / d;
    } else {
      w[j] = d;
      cx[j] = s.xhat[j] - s.the_x[j] / d;
      cy[j] = s.yhat[j] - s.the_y[j] / d;
    }
  }

  EnergyBlockResult out;
  out.xddot.assign(n, 0.0);
  out.yddot.assign(n, 0.0);
  std::vector<double> scratch;
  solve_chain(w, cx, cy, 0.0, start, end, out.xddot, out.yddot, scratch);

  if (chain_energy(out.xddot, out.yddot) > budget) {
    const double floor_energy =
        (sq(end.x - start.x) + sq(end.y - start.y)) / static_cast<double>(n - 1);
    if (budget < floor_energy * (1.0 - 1e-12)) {
      throw InfeasibleScenario("energy budget below straight-line energy");
    }
    std::vector<double> tx(n), ty(n);
    double lo = 0.0;
    double hi = d;
    solve_chain(w, cx, cy, hi, start, end, tx, ty, scratch);
    int doublings = 0;
    while (chain_energy(tx, ty) > budget) {
      if (++doublings > 400) {
        throw ConvergenceError("energy block: multiplier bracket not found");
      }
      lo = hi;
      hi *= 2.0;
      solve_chain(w, cx, cy, hi, start, end, tx, ty, scratch);
    }
    out.xddot = tx;
    out.yddot = ty;
    double e_hi = chain_energy(tx, ty);
    while (budget - e_hi > 1e-12 * budget && hi - lo > 1e-15 * hi) {
      const double mid = 0.5 * (lo + hi);
      if (mid <= lo || mid >= hi) break;
      solve_chain(w, cx, cy, mid, start, end, tx, ty, scratch);
      const double e_mid = chain_energy(tx, ty);
      if (e_mid <= budget) {
        hi = mid;
        e_hi = e_mid;
        out.xddot = tx;
        out.yddot = ty;
      } else {
        lo = mid;
      }
    }
    out.phi = hi;
  }

  out.xhat = s.xhat;
  out.yhat = s.yhat;
  for (std::size_t j = 2; j + 1 < n; j += 2) {
    out.xhat[j] = 0.5 * (out.xddot[j] + s.the_x[j] / d + s.x[j] - s.eta_x[j] / d);
    out.yhat[j] = 0.5 * (out.yddot[j] + s.the_y[j] / d + s.y[j] - s.eta_y[j] / d);
  }
  return out;
}

void type3_solve(AdmmState& s, Group g, const Scenario& scen,
                 const CouplingView* view) {
  const std::size_t n = s.size();
  if (g == Group::kFirst) {
    EnergyBlockResult r = solve_energy_block(s, scen.displacement_budget());
    s.xddot = std::move(r.xddot);
    s.yddot = std::move(r.yddot);
    s.xhat = std::move(r.xhat);
    s.yhat = std::move(r.yhat);
    return;
  }
  const double d = s.delta;
  for (std::size_t j = 1; j + 1 < n; j += 2) {
    const double xd = view ? view->dd_x[j] : s.xddot[j];
    const double yd = view ? view->dd_y[j] : s.yddot[j];
    const double xc = view ? view->hat_x[j] : s.x[j];
    const double yc = view ? view->hat_y[j] : s.y[j];
    s.xhat[j] = 0.5 * (xd + xc) + (s.the_x[j] - s.eta_x[j]) / (2 * d);
    s.yhat[j] = 0.5 * (yd + yc) + (s.the_y[j] - s.eta_y[j]) / (2 * d);
  }
}

void dual_update(AdmmState& s, const CouplingView* view) {
  const double d = s.delta;
  if (!view) {
    for (std::size_t j = 0; j < s.size(); ++j) {
      s.lam_x[j] += d * (s.xbar[j] - s.x[j]);
      s.lam_y[j] += d * (s.ybar[j] - s.y[j]);
      s.omg_x[j] += d * (s.xtil[j] - s.x[j]);
      s.omg_y[j] += d * (s.ytil[j] - s.y[j]);
      s.eta_x[j] += d * (s.xhat[j] - s.x[j]);
      s.eta_y[j] += d * (s.yhat[j] - s.y[j]);
      s.the_x[j] += d * (s.xddot[j] - s.xhat[j]);
      s.the_y[j] += d * (s.yddot[j] - s.yhat[j]);
    }
    return;
  }
  // The group-1 side of each constraint comes from the view, the group-2
  // side from the state.
  for (std::size_t j = 0; j < s.size(); ++j) {
    if (j % 2 == 1) {
      s.lam_x[j] += d * (s.xbar[j] - view->bar_x[j]);
      s.lam_y[j] += d * (s.ybar[j] - view->bar_y[j]);
      s.omg_x[j] += d * (s.xtil[j] - view->til_x[j]);
      s.omg_y[j] += d * (s.ytil[j] - view->til_y[j]);
      s.eta_x[j] += d * (s.xhat[j] - view->hat_x[j]);
      s.eta_y[j] += d * (s.yhat[j] - view->hat_y[j]);
      s.the_x[j] += d * (view->dd_x[j] - s.xhat[j]);
      s.the_y[j] += d * (view->dd_y[j] - s.yhat[j]);
    } else {
      s.lam_x[j] += d * (view->bar_x[j] - s.x[j]);
      s.lam_y[j] += d * (view->bar_y[j] - s.y[j]);
      s.omg_x[j] += d * (view->til_x[j] - s.x[j]);
      s.omg_y[j] += d * (view->til_y[j] - s.y[j]);
      s.eta_x[j] += d * (view->hat_x[j] - s.x[j]);
      s.eta_y[j] += d * (view->hat_y[j] - s.y[j]);
      s.the_x[j] += d * (s.xddot[j] - s.xhat[j]);
      s.the_y[j] += d * (s.yddot[j] - s.yhat[j]);
    }
  }
}

Residuals residuals(const AdmmState& prev, const AdmmState& cur) {
  double r2 = 0;
  double s2 = 0;
  const double d = cur.delta;
  for (std::size_t j = 0; j < cur.size(); ++j) {
    r2 += sq(cur.x[j] - cur.xbar[j]) + sq(cur.y[j] - cur.ybar[j]) +
          sq(cur.x[j] - cur.xtil[j]) + sq(cur.y[j] - cur.ytil[j]) +
          sq(cur.x[j] - cur.xhat[j]) + sq(cur.y[j] - cur.yhat[j]) +
          sq(cur.xhat[j] - cur.xddot[j]) + sq(cur.yhat[j] - cur.yddot[j]);
    if (j % 2 == 1) {
      // x[j] (group 1) meets xbar/xtil/xhat[j] (group 2); xddot[j]
      // (group 1) meets xhat[j].
      const double cx = (cur.xbar[j] - prev.xbar[j]) +
                        (cur.xtil[j] - prev.xtil[j]) +
                        (cur.xhat[j] - prev.xhat[j]);
      const double cy = (cur.ybar[j] - prev.ybar[j]) +
                        (cur.ytil[j] - prev.ytil[j]) +
                        (cur.yhat[j] - prev.yhat[j]);
      s2 += sq(cx) + sq(cy) + sq(cur.xhat[j] - prev.xhat[j]) +
            sq(cur.yhat[j] - prev.yhat[j]);
    } else {
      // xbar/xtil/xhat[j] (group 1) each meet x[j] (group 2).
      s2 += 3.0 * (sq(cur.x[j] - prev.x[j]) + sq(cur.y[j] - prev.y[j]));
    }
  }
  return {std::sqrt(r2), d * std::sqrt(s2)};
}

double default_eps(int T) { return 1e-4 * std::sqrt(8.0 * T); }

double initial_penalty(const SurrogateCoeffs& c, const AdmmConfig& cfg) {
  if (cfg.delta_scale <= 0) return cfg.delta;
  double a_max = 0;
  for (std::size_t i = 0; i < c.size(); ++i) {
    if (c.active(i)) a_max = std::max(a_max, c.a_coef[i]);
  }
  return a_max > 0 ? cfg.delta_scale * a_max : cfg.delta;
}

Trajectory repair_trajectory(const Trajectory& traj, const Scenario& scen,
                             bool* changed) {
  constexpr double kStrict = 1e-12;
  Trajectory out = traj;
  out.x.front() = scen.x1;
  out.y.front() = scen.y1;
  out.x.back() = scen.xT;
  out.y.back() = scen.yT;
  if (changed) *changed = false;
  if (check_trajectory(out, scen, kStrict).all_passed()) return out;

  const Trajectory line = straight_line(scen);
  if (!check_trajectory(line, scen, kStrict).all_passed()) {
    throw InfeasibleScenario("straight line violates speed or energy limits");
  }
  auto blend = [&](double s) {
    Trajectory b(line.size());
    for (std::size_t i = 0; i < line.size(); ++i) {
      b.x[i] = line.x[i] + s * (out.x[i] - line.x[i]);
      b.y[i] = line.y[i] + s * (out.y[i] - line.y[i]);
    }
    return b;
  };
  double lo = 0.0;
  double hi = 1.0;
  for (int it = 0; it < 60; ++it) {
    const double mid = 0.5 * (lo + hi);
    if (check_trajectory(blend(mid), scen, kStrict).all_passed()) {
      lo = mid;
    } else {
      hi = mid;
    }
  }
  if (changed) *changed = true;
  return blend(lo);
}

AdmmResult admm_run(const Trajectory& traj_f, std::span<const double> u_f,
                    std::span<const double> t_f, const PowerPlan& plan,
                    const Scenario& scen, const AdmmConfig& cfg,
                    const AdmmState* warm) {
  if (traj_f.size() != static_cast<std::size_t>(scen.T)) {
    throw DimensionError("trajectory length does not match T");
  }
  const SurrogateCoeffs coeffs = build_surrogate(traj_f, u_f, t_f, plan, scen);
  AdmmState state =
      initial_state(traj_f, u_f, t_f, initial_penalty(coeffs, cfg));
  if (warm) {
    if (warm->size() != state.size()) {
      throw DimensionError("warm-start state length does not match T");
    }
    state.lam_x = warm->lam_x;
    state.lam_y = warm->lam_y;
    state.omg_x = warm->omg_x;
    state.omg_y = warm->omg_y;
    state.eta_x = warm->eta_x;
    state.eta_y = warm->eta_y;
    state.the_x = warm->the_x;
    state.the_y = warm->the_y;
  }
  const double eps = cfg.eps > 0 ? cfg.eps : default_eps(scen.T);

  AdmmResult result;
  AdmmState prev;
  for (int it = 1; it <= cfg.max_iter; ++it) {
    prev = state;
    type1_solve(state, Group::kFirst, scen);
    type2_solve(state, Group::kFirst, coeffs, scen);
    type3_solve(state, Group::kFirst, scen);
    if (cfg.relaxation == 1.0) {
      type1_solve(state, Group::kSecond, scen);
      type2_solve(state, Group::kSecond, coeffs, scen);
      type3_solve(state, Group::kSecond, scen);
      dual_update(state);
    } else {
      const CouplingView view = coupling_view(state, cfg.relaxation);
      type1_solve(state, Group::kSecond, scen, &view);
      type2_solve(state, Group::kSecond, coeffs, scen, &view);
      type3_solve(state, Group::kSecond, scen, &view);
      dual_update(state, &view);
    }

    const Residuals res = residuals(prev, state);
    result.iterations = it;
    result.last = res;
    if (cfg.record_residuals) {
      result.r_trace.push_back(res.r_norm);
      result.s_trace.push_back(res.s_norm);
    }
    if (std::max(res.r_norm, res.s_norm) < eps) {
      result.converged = true;
      break;
    }
    if (cfg.adaptive_penalty && it % cfg.adapt_every == 0) {
      if (res.r_norm > cfg.balance_ratio * res.s_norm) {
        state.delta *= cfg.penalty_scale;
      } else if (res.s_norm > cfg.balance_ratio * res.r_norm) {
        state.delta /= cfg.penalty_scale;
      }
    }
  }

  if (!result.converged &&
      std::max(result.last.r_norm, result.last.s_norm) > 10.0 * eps) {
    std::ostringstream os;
    os << "ADMM did not converge in " << cfg.max_iter
       << " iterations: r=" << result.last.r_norm
       << " s=" << result.last.s_norm << " eps=" << eps;
    throw ConvergenceError(os.str());
  }

  result.final_delta = state.delta;
  Trajectory consensus;
  consensus.x = state.x;
  consensus.y = state.y;
  result.traj = repair_trajectory(consensus, scen, &result.repaired);
  result.u = state.u;
  result.t = state.t;
  result.final_state = std::move(state);
  return result;
}

}  // namespace uavsec
