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

#include "uavsec/oracle.hpp"

#include <algorithm>
#include <cmath>
#include <limits>

namespace uavsec::oracle {

namespace {

using Eigen::MatrixXd;
using Eigen::VectorXd;

constexpr double kInf = std::numeric_limits<double>::infinity();
constexpr double kGolden = 0.61803398874989484820;

// Golden-section maximization of a concave function on [lo, hi].  Returns
// the best abscissa seen, endpoints included.
double golden_max(const std::function<double(double)>& f, double lo,
                  double hi, int iters) {
  double best_s = lo;
  double best_v = f(lo);
  auto consider = [&](double s, double v) {
    if (v > best_v) {
      best_v = v;
      best_s = s;
    }
  };
  consider(hi, f(hi));
  double a = lo, b = hi;
  double c = b - kGolden * (b - a);
  double d = a + kGolden * (b - a);
  double fc = f(c), fd = f(d);
  consider(c, fc);
  consider(d, fd);
  for (int i = 0; i < iters && b - a > 0; ++i) {
    if (fc >= fd) {
      b = d;
      d = c;
      fd = fc;
      c = b - kGolden * (b - a);
      fc = f(c);
      consider(c, fc);
    } else {
      a = c;
      c = d;
      fc = fd;
      d = a + kGolden * (b - a);
      fd = f(d);
      consider(d, fd);
    }
  }
  return best_s;
}

double sq(double v) { return v * v; }

// Adds -d/2 (v'z + k)^2 to a program.
void add_neg_square(LogQuadProgram& prog, const VectorXd& v, double k,
                    double d) {
  prog.Q += d * v * v.transpose();
  prog.c -= d * k * v;
  prog.c0 -= 0.5 * d * k * k;
}

// Adds (v'z + k)^2 to a constraint.
void add_square(QuadConstraint& g, const VectorXd& v, double k) {
  g.P += 2.0 * v * v.transpose();
  g.q += 2.0 * k * v;
  g.r += k * k;
}

QuadConstraint empty_constraint(int n, bool quadratic) {
  QuadConstraint g;
  if (quadratic) g.P = MatrixXd::Zero(n, n);
  g.q = VectorXd::Zero(n);
  return g;
}

}  // namespace

// ---------------------------------------------------------------------------
// Per-slot power problem.

double slot_value(const SlotInstance& s, double a, double b) {
  const double k = s.snr_per_watt;
  const double den_f = k * (s.a_f + s.b_f) + s.dE2;
  const double bob = std::log(1.0 + k * a / s.dI2);
  const double eve = std::log(k * b + s.dE2) -
                     (std::log(den_f) + k * (a + b - s.a_f - s.b_f) / den_f);
  return bob + eve - s.lambda * (a + b);
}

GridResult grid_triangle_max(const std::function<double(double, double)>& f,
                             double p_max, const OracleConfig& cfg) {
  GridResult best{0, 0, f(0, 0)};
  if (!(p_max > 0)) return best;
  const int n = std::max(cfg.grid_resolution, 2);
  const double h = p_max / (n - 1);
  for (int i = 0; i < n; ++i) {
    for (int j = 0; i + j < n; ++j) {
      const double a = i * h;
      const double b = j * h;
      const double v = f(a, b);
      if (v > best.value) best = {a, b, v};
    }
  }
  // Cyclic line searches; the third direction slides along a + b = const,
  // which coordinate moves cannot do on the hypotenuse.
  const double dirs[3][2] = {{1, 0}, {0, 1}, {1, -1}};
  for (int cycle = 0; cycle < cfg.refine_iters; ++cycle) {
    const GridResult before = best;
    for (const auto& dir : dirs) {
      const double da = dir[0], db = dir[1];
      double lo = -kInf, hi = kInf;
      auto clip = [&](double pos, double step, double lower, double upper) {
        if (step > 0) {
          lo = std::max(lo, (lower - pos) / step);
          hi = std::min(hi, (upper - pos) / step);
        } else if (step < 0) {
          lo = std::max(lo, (upper - pos) / step);
          hi = std::min(hi, (lower - pos) / step);
        }
      };
      clip(best.a, da, 0.0, p_max);
      clip(best.b, db, 0.0, p_max);
      clip(best.a + best.b, da + db, 0.0, p_max);
      if (!(hi > lo)) continue;
      auto line = [&](double s) {
        return f(std::max(0.0, best.a + s * da), std::max(0.0, best.b + s * db));
      };
      const double s = golden_max(line, lo, hi, 120);
      const double a = std::max(0.0, best.a + s * da);
      const double b = std::max(0.0, best.b + s * db);
      const double v = f(a, b);
      if (v > best.value) best = {a, b, v};
    }
    if (best.value == before.value) break;
  }
  return best;
}

GridResult grid_slot_oracle(const SlotInstance& s, const OracleConfig& cfg) {
  return grid_triangle_max(
      [&s](double a, double b) { return slot_value(s, a, b); }, s.p_max, cfg);
}

GridResult fixed_split_oracle(const SlotInstance& s, double rho,
                              const OracleConfig& cfg) {
  auto f = [&](double p) { return slot_value(s, rho * p, (1.0 - rho) * p); };
  GridResult best{0, 0, f(0)};
  if (!(s.p_max > 0)) return best;
  const int n = std::max(cfg.grid_resolution, 2) * 64;
  const double h = s.p_max / (n - 1);
  int best_i = 0;
  for (int i = 0; i < n; ++i) {
    const double v = f(i * h);
    if (v > best.value) {
      best.value = v;
      best_i = i;
    }
  }
  const double lo = std::max(0, best_i - 1) * h;
  const double hi = std::min(n - 1, best_i + 1) * h;
  const double p = golden_max(f, lo, hi, 200);
  const double v = f(p);
  double p_best = best_i * h;
  if (v > best.value) {
    best.value = v;
    p_best = p;
  }
  best.a = rho * p_best;
  best.b = (1.0 - rho) * p_best;
  return best;
}

// ---------------------------------------------------------------------------
// Speed pair.

namespace {

struct PairTargets {
  Point2 t[3];  // pulls on x
  Point2 tz;    // pull on xbar_next
};

PairTargets pair_targets(const SpeedPairProblem& p) {
  const double d = p.delta;
  PairTargets out;
  out.t[0] = {p.xbar.x + p.lam.x / d, p.xbar.y + p.lam.y / d};
  out.t[1] = {p.xtil.x + p.omg.x / d, p.xtil.y + p.omg.y / d};
  out.t[2] = {p.xhat.x + p.eta.x / d, p.xhat.y + p.eta.y / d};
  out.tz = {p.x_next.x - p.lam_next.x / d, p.x_next.y - p.lam_next.y / d};
  return out;
}

Point2 onto_ball(Point2 v, Point2 center, double r) {
  const double dx = v.x - center.x, dy = v.y - center.y;
  const double n = std::hypot(dx, dy);
  if (n <= r) return v;
  return {center.x + dx * r / n, center.y + dy * r / n};
}

}  // namespace

double speed_pair_value(const SpeedPairProblem& p, Point2 x, Point2 z) {
  const PairTargets tg = pair_targets(p);
  double s = sq(z.x - tg.tz.x) + sq(z.y - tg.tz.y);
  for (const Point2& t : tg.t) s += sq(x.x - t.x) + sq(x.y - t.y);
  return -0.5 * p.delta * s;
}

PairResult pg_speed_pair_oracle(const SpeedPairProblem& p,
                                const OracleConfig& cfg) {
  const PairTargets tg = pair_targets(p);
  const double d = p.delta;
  const double step = cfg.pg_step > 0 ? cfg.pg_step : 1.0 / (3.0 * d);
  Point2 x = p.pinned_x ? *p.pinned_x : tg.t[0];
  Point2 z = p.pinned_xbar ? *p.pinned_xbar : tg.tz;

  auto project = [&](Point2& xv, Point2& zv) {
    if (p.pinned_x && p.pinned_xbar) return;
    if (p.pinned_x) {
      zv = onto_ball(zv, xv, p.radius);
    } else if (p.pinned_xbar) {
      xv = onto_ball(xv, zv, p.radius);
    } else {
      const Point2 m{0.5 * (xv.x + zv.x), 0.5 * (xv.y + zv.y)};
      Point2 v{xv.x - zv.x, xv.y - zv.y};
      const double n = std::hypot(v.x, v.y);
      if (n > p.radius) {
        v = {v.x * p.radius / n, v.y * p.radius / n};
      }
      xv = {m.x + 0.5 * v.x, m.y + 0.5 * v.y};
      zv = {m.x - 0.5 * v.x, m.y - 0.5 * v.y};
    }
  };
  project(x, z);

  double scale = 1.0 + p.radius;
  for (const Point2& t : tg.t) scale = std::max(scale, std::hypot(t.x, t.y));
  scale = std::max(scale, std::hypot(tg.tz.x, tg.tz.y));

  PairResult out;
  for (int it = 1; it <= cfg.pg_max_iter; ++it) {
    Point2 gx{0, 0};
    for (const Point2& t : tg.t) {
      gx.x -= d * (x.x - t.x);
      gx.y -= d * (x.y - t.y);
    }
    const Point2 gz{-d * (z.x - tg.tz.x), -d * (z.y - tg.tz.y)};
    Point2 xn = x, zn = z;
    if (!p.pinned_x) xn = {x.x + step * gx.x, x.y + step * gx.y};
    if (!p.pinned_xbar) zn = {z.x + step * gz.x, z.y + step * gz.y};
    project(xn, zn);
    const double moved = std::hypot(xn.x - x.x, xn.y - x.y) +
                         std::hypot(zn.x - z.x, zn.y - z.y);
    x = xn;
    z = zn;
    out.iterations = it;
    if (moved <= cfg.pg_tol * scale) {
      out.x = x;
      out.xbar_next = z;
      out.value = speed_pair_value(p, x, z);
      return out;
    }
  }
  throw OracleFailure("projected gradient did not reach pg_tol");
}

// ---------------------------------------------------------------------------
// Log-quadratic programs.

double QuadConstraint::value(const VectorXd& z) const {
  double v = q.dot(z) + r;
  if (P.size() > 0) v += 0.5 * z.dot(P * z);
  return v;
}

VectorXd QuadConstraint::gradient(const VectorXd& z) const {
  VectorXd g = q;
  if (P.size() > 0) g += P * z;
  return g;
}

LogQuadProgram::LogQuadProgram(int dim)
    : n(dim), Q(MatrixXd::Zero(dim, dim)), c(VectorXd::Zero(dim)) {}

double LogQuadProgram::objective(const VectorXd& z) const {
  double v = -0.5 * z.dot(Q * z) + c.dot(z) + c0;
  for (const LogTerm& t : logs) {
    const double arg = t.a.dot(z) + t.b;
    if (!(arg > 0)) return -kInf;
    v += t.weight * std::log(arg);
  }
  return v;
}

VectorXd LogQuadProgram::gradient(const VectorXd& z) const {
  VectorXd g = -Q * z + c;
  for (const LogTerm& t : logs) g += t.weight / (t.a.dot(z) + t.b) * t.a;
  return g;
}

MatrixXd LogQuadProgram::hessian(const VectorXd& z) const {
  MatrixXd h = -Q;
  for (const LogTerm& t : logs) {
    const double arg = t.a.dot(z) + t.b;
    h -= t.weight / (arg * arg) * t.a * t.a.transpose();
  }
  return h;
}

double LogQuadProgram::max_violation(const VectorXd& z) const {
  double worst = 0;
  for (const QuadConstraint& g : cons) worst = std::max(worst, g.value(z));
  return worst;
}

BarrierResult barrier_maximize(const LogQuadProgram& prog, const VectorXd& z0,
                               const BarrierOptions& opt) {
  const int m = static_cast<int>(prog.cons.size());
  for (const QuadConstraint& g : prog.cons) {
    if (!(g.value(z0) < 0)) {
      throw OracleFailure("barrier start is not strictly feasible");
    }
  }
  if (!std::isfinite(prog.objective(z0))) {
    throw OracleFailure("barrier start is outside the log domain");
  }

  VectorXd z = z0;
  double t = opt.t0;
  BarrierResult out;
  auto phi = [&](const VectorXd& v) {
    double s = t * prog.objective(v);
    if (!std::isfinite(s)) return -kInf;
    for (const QuadConstraint& g : prog.cons) {
      const double gv = g.value(v);
      if (!(gv < 0)) return -kInf;
      s += std::log(-gv);
    }
    return s;
  };

  while (true) {
    for (int it = 0; it < opt.max_newton; ++it) {
      VectorXd grad = t * prog.gradient(z);
      MatrixXd hess = t * prog.hessian(z);
      for (const QuadConstraint& g : prog.cons) {
        const double gv = g.value(z);
        const VectorXd gg = g.gradient(z);
        grad += gg / gv;  // d/dz log(-g) = g' / g
        hess -= gg * gg.transpose() / (gv * gv);
        if (g.P.size() > 0) hess += g.P / gv;
      }
      const MatrixXd neg = -hess;
      Eigen::LDLT<MatrixXd> ldlt(neg);
      VectorXd step = ldlt.solve(grad);
      if (ldlt.info() != Eigen::Success || !step.allFinite()) {
        const double reg = 1e-12 * (1.0 + neg.diagonal().cwiseAbs().maxCoeff());
        step = (neg + reg * MatrixXd::Identity(prog.n, prog.n)).ldlt().solve(grad);
      }
      const double dec = grad.dot(step);
      ++out.newton_steps;
      if (!(dec > 2.0 * opt.newton_tol)) break;
      const double f0 = phi(z);
      double s = 1.0;
      bool moved = false;
      while (s > 1e-14) {
        const VectorXd zn = z + s * step;
        const double fn = phi(zn);
        if (fn >= f0 + 0.25 * s * dec) {
          z = zn;
          moved = true;
          break;
        }
        s *= 0.5;
      }
      if (!moved) break;  // rounding floor reached
    }
    if (m == 0 || m / t <= opt.gap_tol * (1.0 + std::abs(prog.objective(z)))) {
      break;
    }
    t *= opt.growth;
  }

  out.z = z;
  out.value = prog.objective(z);
  out.mu = VectorXd::Zero(m);
  for (int j = 0; j < m; ++j) out.mu[j] = 1.0 / (t * -prog.cons[j].value(z));
  return out;
}

// ---------------------------------------------------------------------------
// KKT certification.

double KktReport::max() const {
  return std::max({stationarity, primal, dual, slackness});
}

VectorXd nnls(const MatrixXd& A, const VectorXd& b, int max_iter) {
  const int n = static_cast<int>(A.cols());
  VectorXd x = VectorXd::Zero(n);
  std::vector<bool> passive(n, false);
  const double tol = 1e-13 * (1.0 + A.cwiseAbs().maxCoeff()) *
                     (1.0 + b.cwiseAbs().maxCoeff());

  auto solve_passive = [&]() {
    std::vector<int> idx;
    for (int j = 0; j < n; ++j) {
      if (passive[j]) idx.push_back(j);
    }
    VectorXd s = VectorXd::Zero(n);
    if (idx.empty()) return s;
    MatrixXd Ap(A.rows(), idx.size());
    for (std::size_t k = 0; k < idx.size(); ++k) Ap.col(k) = A.col(idx[k]);
    const VectorXd sp = Ap.colPivHouseholderQr().solve(b);
    for (std::size_t k = 0; k < idx.size(); ++k) s[idx[k]] = sp[k];
    return s;
  };

  for (int it = 0; it < max_iter; ++it) {
    const VectorXd w = A.transpose() * (b - A * x);
    int best = -1;
    double best_w = tol;
    for (int j = 0; j < n; ++j) {
      if (!passive[j] && w[j] > best_w) {
        best_w = w[j];
        best = j;
      }
    }
    if (best < 0) break;
    passive[best] = true;
    while (true) {
      VectorXd s = solve_passive();
      bool ok = true;
      for (int j = 0; j < n; ++j) {
        if (passive[j] && s[j] <= 0) ok = false;
      }
      if (ok) {
        x = s;
        break;
      }
      double alpha = 1.0;
      for (int j = 0; j < n; ++j) {
        if (passive[j] && s[j] <= 0) {
          alpha = std::min(alpha, x[j] / (x[j] - s[j]));
        }
      }
      x += alpha * (s - x);
      for (int j = 0; j < n; ++j) {
        if (passive[j] && x[j] <= 1e-300) {
          passive[j] = false;
          x[j] = 0;
        }
      }
    }
  }
  return x;
}

KktReport kkt_residual(const LogQuadProgram& prog, const VectorXd& z,
                       std::optional<VectorXd> mu, double active_tol) {
  const int m = static_cast<int>(prog.cons.size());
  const VectorXd gf = prog.gradient(z);
  const double gf_scale = 1.0 + gf.cwiseAbs().maxCoeff();
  const double z_scale = 1.0 + z.cwiseAbs().maxCoeff();

  MatrixXd G(prog.n, m);
  VectorXd gval(m);
  VectorXd norm(m);
  for (int j = 0; j < m; ++j) {
    const VectorXd gg = prog.cons[j].gradient(z);
    norm[j] = std::max(1.0, gg.cwiseAbs().maxCoeff());
    G.col(j) = gg / norm[j];
    gval[j] = prog.cons[j].value(z) / norm[j];
  }

  KktReport rep;
  VectorXd mu_hat = VectorXd::Zero(m);
  if (mu) {
    if (mu->size() != m) throw DimensionError("multiplier count mismatch");
    mu_hat = mu->cwiseProduct(norm);
  } else {
    std::vector<int> act;
    for (int j = 0; j < m; ++j) {
      if (gval[j] >= -active_tol * z_scale) act.push_back(j);
    }
    if (!act.empty()) {
      MatrixXd Ga(prog.n, act.size());
      for (std::size_t k = 0; k < act.size(); ++k) Ga.col(k) = G.col(act[k]);
      const VectorXd est = nnls(Ga, gf);
      for (std::size_t k = 0; k < act.size(); ++k) mu_hat[act[k]] = est[k];
    }
  }

  rep.stationarity = (gf - G * mu_hat).cwiseAbs().maxCoeff() / gf_scale;
  if (prog.n == 0) rep.stationarity = 0;
  for (int j = 0; j < m; ++j) {
    rep.primal = std::max(rep.primal, std::max(0.0, gval[j]) / z_scale);
    rep.dual = std::max(rep.dual, std::max(0.0, -mu_hat[j]) / gf_scale);
    rep.slackness = std::max(
        rep.slackness, std::abs(mu_hat[j] * gval[j]) / (gf_scale * z_scale));
  }
  rep.mu = mu_hat.cwiseQuotient(norm);
  return rep;
}

// ---------------------------------------------------------------------------
// Trajectory block programs.

LogQuadProgram distance_slot_program(const DistanceSlotProblem& p) {
  LogQuadProgram prog(4);
  const double d = p.delta;
  // Penalty -d/2 |xtil - (x - omg/d)|^2 per coordinate.
  VectorXd e = VectorXd::Zero(4);
  e[0] = 1;
  add_neg_square(prog, e, -(p.x.x - p.omg.x / d), d);
  e.setZero();
  e[1] = 1;
  add_neg_square(prog, e, -(p.x.y - p.omg.y / d), d);
  prog.c[2] -= p.a_coef;
  prog.c[3] -= p.t_lin;
  LogTerm lt;
  lt.a = VectorXd::Zero(4);
  lt.a[3] = 1;
  lt.b = p.noise;
  prog.logs.push_back(lt);

  // |xtil|^2 + H^2 - u <= 0
  QuadConstraint gu = empty_constraint(4, true);
  gu.P(0, 0) = gu.P(1, 1) = 2;
  gu.q[2] = -1;
  gu.r = p.H * p.H;
  prog.cons.push_back(gu);
  // t - (dE2_f + 2 e . (xtil - x_f)) <= 0 with e = (x_f - L, y_f)
  const double ex = p.lin_at.x - p.L;
  const double ey = p.lin_at.y;
  QuadConstraint gt = empty_constraint(4, false);
  gt.q[0] = -2 * ex;
  gt.q[1] = -2 * ey;
  gt.q[3] = 1;
  gt.r = -(ex * ex + ey * ey + p.H * p.H) + 2 * ex * p.lin_at.x +
         2 * ey * p.lin_at.y;
  prog.cons.push_back(gt);
  return prog;
}

VectorXd distance_slot_start(const DistanceSlotProblem& p) {
  VectorXd z(4);
  z[0] = p.lin_at.x;
  z[1] = p.lin_at.y;
  const double r2 = sq(p.lin_at.x) + sq(p.lin_at.y) + p.H * p.H;
  z[2] = r2 * (1 + 1e-3) + 1;
  const double bound = sq(p.lin_at.x - p.L) + sq(p.lin_at.y) + p.H * p.H;
  z[3] = 0.5 * bound;
  return z;
}

LogQuadProgram speed_pair_program(const SpeedPairProblem& p) {
  LogQuadProgram prog(4);
  const PairTargets tg = pair_targets(p);
  const double d = p.delta;
  for (int coord = 0; coord < 2; ++coord) {
    VectorXd e = VectorXd::Zero(4);
    e[coord] = 1;
    for (const Point2& t : tg.t) {
      add_neg_square(prog, e, -(coord == 0 ? t.x : t.y), d);
    }
    e.setZero();
    e[2 + coord] = 1;
    add_neg_square(prog, e, -(coord == 0 ? tg.tz.x : tg.tz.y), d);
  }
  QuadConstraint g = empty_constraint(4, true);
  for (int coord = 0; coord < 2; ++coord) {
    VectorXd v = VectorXd::Zero(4);
    v[coord] = 1;
    v[2 + coord] = -1;
    add_square(g, v, 0.0);
  }
  g.r -= p.radius * p.radius;
  prog.cons.push_back(g);
  return prog;
}

VectorXd EnergyProgram::pack(const AdmmState& s) const {
  VectorXd z(prog.n);
  int k = 0;
  for (std::size_t j : dd_slots) {
    z[k++] = s.xddot[j];
    z[k++] = s.yddot[j];
  }
  for (std::size_t j : hat_slots) {
    z[k++] = s.xhat[j];
    z[k++] = s.yhat[j];
  }
  return z;
}

VectorXd EnergyProgram::start(const AdmmState& s) const {
  VectorXd z = pack(s);
  const std::size_t n = s.size();
  int k = 0;
  for (std::size_t j : dd_slots) {
    const double w = static_cast<double>(j) / static_cast<double>(n - 1);
    z[k++] = s.xddot[0] + w * (s.xddot[n - 1] - s.xddot[0]);
    z[k++] = s.yddot[0] + w * (s.yddot[n - 1] - s.yddot[0]);
  }
  return z;
}

EnergyProgram energy_block_program(const AdmmState& s, double budget) {
  const std::size_t n = s.size();
  const double d = s.delta;
  EnergyProgram ep;
  for (std::size_t j = 1; j + 1 < n; ++j) ep.dd_slots.push_back(j);
  for (std::size_t j = 2; j + 1 < n; j += 2) ep.hat_slots.push_back(j);
  const int nv = static_cast<int>(2 * (ep.dd_slots.size() + ep.hat_slots.size()));
  ep.prog = LogQuadProgram(nv);

  // Variable index of xddot / xhat at slot j, coordinate c; -1 for data.
  auto dd_index = [&](std::size_t j, int c) {
    return (j >= 1 && j + 1 < n) ? static_cast<int>(2 * (j - 1)) + c : -1;
  };
  auto hat_index = [&](std::size_t j, int c) {
    const auto it = std::find(ep.hat_slots.begin(), ep.hat_slots.end(), j);
    if (it == ep.hat_slots.end()) return -1;
    return static_cast<int>(2 * ep.dd_slots.size() +
                            2 * (it - ep.hat_slots.begin())) + c;
  };
  auto dd_value = [&](std::size_t j, int c) {
    return c == 0 ? s.xddot[j] : s.yddot[j];
  };
  auto hat_value = [&](std::size_t j, int c) {
    return c == 0 ? s.xhat[j] : s.yhat[j];
  };

  QuadConstraint energy = empty_constraint(nv, true);
  for (std::size_t j = 0; j < n; ++j) {
    for (int c = 0; c < 2; ++c) {
      const double the = c == 0 ? s.the_x[j] : s.the_y[j];
      const double eta = c == 0 ? s.eta_x[j] : s.eta_y[j];
      const double xc = c == 0 ? s.x[j] : s.y[j];
      // xhat - xddot - the / d
      VectorXd v = VectorXd::Zero(nv);
      double k = -the / d;
      const int hi = hat_index(j, c);
      const int di = dd_index(j, c);
      if (hi >= 0) v[hi] += 1; else k += hat_value(j, c);
      if (di >= 0) v[di] -= 1; else k -= dd_value(j, c);
      if (hi >= 0 || di >= 0) add_neg_square(ep.prog, v, k, d);
      // x - xhat - eta / d, only where xhat is a variable
      if (hi >= 0) {
        VectorXd w = VectorXd::Zero(nv);
        w[hi] = -1;
        add_neg_square(ep.prog, w, xc - eta / d, d);
      }
      // (xddot[j] - xddot[j + 1])^2
      if (j + 1 < n) {
        VectorXd e = VectorXd::Zero(nv);
        double ke = 0;
        const int a = dd_index(j, c);
        const int b = dd_index(j + 1, c);
        if (a >= 0) e[a] += 1; else ke += dd_value(j, c);
        if (b >= 0) e[b] -= 1; else ke -= dd_value(j + 1, c);
        add_square(energy, e, ke);
      }
    }
  }
  energy.r -= budget;
  ep.prog.cons.push_back(energy);
  return ep;
}

// ---------------------------------------------------------------------------
// Whole surrogates.

PowerOracleResult power_surrogate_oracle(const Trajectory& traj,
                                         const SplitPower& point,
                                         const Scenario& scen,
                                         const BarrierOptions& opt) {
  const int T = static_cast<int>(traj.size());
  const double k = scen.gamma0 / scen.sigma2;
  LogQuadProgram prog(2 * T);
  QuadConstraint total = empty_constraint(2 * T, false);
  for (int i = 0; i < T; ++i) {
    const double dI2 = sq(traj.x[i]) + sq(traj.y[i]) + sq(scen.H);
    const double dE2 = sq(traj.x[i] - scen.L) + sq(traj.y[i]) + sq(scen.H);
    const double den_f = k * (point.a[i] + point.b[i]) + dE2;
    LogTerm bob;
    bob.a = VectorXd::Zero(2 * T);
    bob.a[2 * i] = k;
    bob.b = dI2;
    prog.logs.push_back(bob);
    LogTerm eve;
    eve.a = VectorXd::Zero(2 * T);
    eve.a[2 * i + 1] = k;
    eve.b = dE2;
    prog.logs.push_back(eve);
    prog.c[2 * i] -= k / den_f;
    prog.c[2 * i + 1] -= k / den_f;
    prog.c0 += -std::log(dI2) - std::log(den_f) +
               k * (point.a[i] + point.b[i]) / den_f;

    for (int v = 0; v < 2; ++v) {
      QuadConstraint g = empty_constraint(2 * T, false);
      g.q[2 * i + v] = -1;
      prog.cons.push_back(g);
    }
    QuadConstraint peak = empty_constraint(2 * T, false);
    peak.q[2 * i] = peak.q[2 * i + 1] = 1;
    peak.r = -scen.P_max;
    prog.cons.push_back(peak);
    total.q[2 * i] = total.q[2 * i + 1] = 1;
  }
  total.r = -scen.total_power();
  prog.cons.push_back(total);

  const double start = 0.25 * std::min(scen.P_max, scen.P_bar);
  const BarrierResult r =
      barrier_maximize(prog, VectorXd::Constant(2 * T, start), opt);
  PowerOracleResult out;
  out.a.resize(T);
  out.b.resize(T);
  for (int i = 0; i < T; ++i) {
    out.a[i] = std::max(0.0, r.z[2 * i]);
    out.b[i] = std::max(0.0, r.z[2 * i + 1]);
  }
  out.value = r.value;
  return out;
}

namespace {

struct SlotCoeffs {
  bool active = false;
  double alpha = 0, beta = 0;
  double A = 0, B = 0;
  double konst = 0;  // constants of the lower bound
  double ex = 0, ey = 0, dE2_f = 0, xf = 0, yf = 0;
};

std::vector<SlotCoeffs> trajectory_coeffs(const Trajectory& traj_f,
                                          const PowerPlan& plan,
                                          const Scenario& scen) {
  const double k = scen.gamma0 / scen.sigma2;
  std::vector<SlotCoeffs> out(traj_f.size());
  for (std::size_t i = 0; i < traj_f.size(); ++i) {
    SlotCoeffs& s = out[i];
    s.alpha = k * plan.p[i] * plan.rho[i];
    s.beta = k * plan.p[i] * (1.0 - plan.rho[i]);
    s.active = s.alpha > 0;
    s.xf = traj_f.x[i];
    s.yf = traj_f.y[i];
    const double u_f = sq(s.xf) + sq(s.yf) + sq(scen.H);
    s.ex = s.xf - scen.L;
    s.ey = s.yf;
    s.dE2_f = sq(s.ex) + sq(s.ey) + sq(scen.H);
    const double t_f = s.dE2_f;
    // log(1 + alpha/u) is convex in u, -log(alpha + beta + t) is convex in
    // t: both are replaced by tangents.
    s.A = s.alpha / (u_f * (u_f + s.alpha));
    s.B = 1.0 / (s.alpha + s.beta + t_f);
    s.konst = std::log(1.0 + s.alpha / u_f) + s.A * u_f -
              std::log(s.alpha + s.beta + t_f) + s.B * t_f;
  }
  return out;
}

}  // namespace

double trajectory_surrogate_value(const Trajectory& traj_f,
                                  const PowerPlan& plan, const Scenario& scen,
                                  const Trajectory& traj) {
  const std::vector<SlotCoeffs> cs = trajectory_coeffs(traj_f, plan, scen);
  double v = 0;
  for (std::size_t i = 0; i < cs.size(); ++i) {
    const SlotCoeffs& s = cs[i];
    if (!s.active) continue;
    const double u = sq(traj.x[i]) + sq(traj.y[i]) + sq(scen.H);
    const double bound = s.dE2_f + 2 * s.ex * (traj.x[i] - s.xf) +
                         2 * s.ey * (traj.y[i] - s.yf);
    const double t = std::min(1.0 / s.B - s.beta, bound);
    if (!(s.beta + t > 0)) return -kInf;
    v += s.konst - s.A * u - s.B * t + std::log(s.beta + t);
  }
  return v;
}

TrajectoryOracleResult trajectory_surrogate_oracle(
    const Trajectory& traj_f, const PowerPlan& plan, const Scenario& scen,
    const BarrierOptions& opt) {
  const std::size_t T = traj_f.size();
  const std::vector<SlotCoeffs> cs = trajectory_coeffs(traj_f, plan, scen);

  // Layout: interior positions (x, y) for slots 1..T-2, then (u, t) for each
  // active slot.
  std::vector<int> ut_index(T, -1);
  int nv = static_cast<int>(2 * (T - 2));
  for (std::size_t i = 0; i < T; ++i) {
    if (cs[i].active) {
      ut_index[i] = nv;
      nv += 2;
    }
  }
  auto pos_index = [&](std::size_t j) {
    return (j >= 1 && j + 1 < T) ? static_cast<int>(2 * (j - 1)) : -1;
  };
  const Point2 ends[2] = {{scen.x1, scen.y1}, {scen.xT, scen.yT}};
  auto pos_const = [&](std::size_t j) { return j == 0 ? ends[0] : ends[1]; };

  LogQuadProgram prog(nv);
  for (std::size_t i = 0; i < T; ++i) {
    const SlotCoeffs& s = cs[i];
    if (!s.active) continue;
    const int iu = ut_index[i];
    const int it = iu + 1;
    prog.c[iu] -= s.A;
    prog.c[it] -= s.B;
    prog.c0 += s.konst;
    LogTerm lt;
    lt.a = VectorXd::Zero(nv);
    lt.a[it] = 1;
    lt.b = s.beta;
    prog.logs.push_back(lt);

    const int ip = pos_index(i);
    QuadConstraint gu = empty_constraint(nv, true);
    QuadConstraint gt = empty_constraint(nv, false);
    gu.q[iu] = -1;
    gu.r = sq(scen.H);
    gt.q[it] = 1;
    gt.r = -s.dE2_f + 2 * s.ex * s.xf + 2 * s.ey * s.yf;
    if (ip >= 0) {
      gu.P(ip, ip) = gu.P(ip + 1, ip + 1) = 2;
      gt.q[ip] = -2 * s.ex;
      gt.q[ip + 1] = -2 * s.ey;
    } else {
      const Point2 p = pos_const(i);
      gu.r += sq(p.x) + sq(p.y);
      gt.r -= 2 * s.ex * p.x + 2 * s.ey * p.y;
    }
    prog.cons.push_back(gu);
    prog.cons.push_back(gt);
  }

  QuadConstraint energy = empty_constraint(nv, true);
  for (std::size_t j = 0; j + 1 < T; ++j) {
    QuadConstraint speed = empty_constraint(nv, true);
    for (int c = 0; c < 2; ++c) {
      VectorXd v = VectorXd::Zero(nv);
      double k = 0;
      const int a = pos_index(j);
      const int b = pos_index(j + 1);
      if (a >= 0) v[a + c] += 1;
      else k += c == 0 ? pos_const(j).x : pos_const(j).y;
      if (b >= 0) v[b + c] -= 1;
      else k -= c == 0 ? pos_const(j + 1).x : pos_const(j + 1).y;
      add_square(speed, v, k);
      add_square(energy, v, k);
    }
    speed.r -= sq(scen.max_step());
    prog.cons.push_back(speed);
  }
  energy.r -= scen.displacement_budget();
  prog.cons.push_back(energy);

  VectorXd z0 = VectorXd::Zero(nv);
  for (std::size_t j = 1; j + 1 < T; ++j) {
    z0[pos_index(j)] = traj_f.x[j];
    z0[pos_index(j) + 1] = traj_f.y[j];
  }
  for (std::size_t i = 0; i < T; ++i) {
    if (!cs[i].active) continue;
    const double r2 = sq(traj_f.x[i]) + sq(traj_f.y[i]) + sq(scen.H);
    z0[ut_index[i]] = r2 * (1 + 1e-3) + 1;
    z0[ut_index[i] + 1] = 0.5 * cs[i].dE2_f;
  }
  const BarrierResult r = barrier_maximize(prog, z0, opt);

  TrajectoryOracleResult out;
  out.traj = Trajectory(T);
  for (std::size_t j = 0; j < T; ++j) {
    const int ip = pos_index(j);
    const Point2 p = ip >= 0 ? Point2{r.z[ip], r.z[ip + 1]} : pos_const(j);
    out.traj.x[j] = p.x;
    out.traj.y[j] = p.y;
  }
  out.value = r.value;
  return out;
}

}  // namespace uavsec::oracle
