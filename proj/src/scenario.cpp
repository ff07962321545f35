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

#include "uavsec/scenario.hpp"

#include <algorithm>
#include <cmath>
#include <sstream>

namespace uavsec {

double db_to_linear(double db) { return std::pow(10.0, db / 10.0); }

double dbm_to_watts(double dbm) { return std::pow(10.0, (dbm - 30.0) / 10.0); }

double noise_power_watts(double density_dbm_per_hz, double bandwidth_hz) {
  return dbm_to_watts(density_dbm_per_hz) * bandwidth_hz;
}

namespace {

void require(bool ok, const char* what) {
  if (!ok) throw InvalidScenario(what);
}

bool finite(double v) { return std::isfinite(v); }

void check_lengths(const Trajectory& traj, const Scenario& scen) {
  if (traj.x.size() != traj.y.size() ||
      traj.x.size() != static_cast<std::size_t>(scen.T)) {
    throw DimensionError("trajectory length does not match T");
  }
}

void check_lengths(const PowerPlan& plan, const Scenario& scen) {
  if (plan.p.size() != plan.rho.size() ||
      plan.p.size() != static_cast<std::size_t>(scen.T)) {
    throw DimensionError("power plan length does not match T");
  }
}

}  // namespace

void Scenario::validate() const {
  require(T >= 2, "T must be at least 2");
  require(finite(delta_t) && delta_t > 0, "delta_t must be positive");
  require(finite(H) && H > 0, "H must be positive");
  require(finite(L), "L must be finite");
  require(finite(x1) && finite(y1) && finite(xT) && finite(yT),
          "endpoints must be finite");
  require(finite(Vmax) && Vmax > 0, "Vmax must be positive");
  require(finite(M) && M > 0, "M must be positive");
  require(finite(E_tr) && E_tr > 0, "E_tr must be positive");
  require(finite(gamma0) && gamma0 > 0, "gamma0 must be positive");
  require(finite(sigma2) && sigma2 > 0, "sigma2 must be positive");
  require(finite(P_max) && P_max > 0, "P_max must be positive");
  require(finite(P_bar) && P_bar >= 0, "P_bar must be non-negative");
  require(P_bar <= P_max, "P_bar must not exceed P_max");
}

Scenario Scenario::nominal() {
  Scenario s;
  s.L = 100;
  s.H = 100;
  s.x1 = -200;
  s.y1 = -150;
  s.xT = 1000;
  s.yT = -150;
  s.delta_t = 0.5;
  s.T = 250;
  s.Vmax = 12;
  s.M = 4;
  s.E_tr = 19.40e3;
  s.gamma0 = db_to_linear(-36);
  s.sigma2 = noise_power_watts(-169, 20e6);
  s.P_bar = dbm_to_watts(0);
  s.P_max = 4 * s.P_bar;
  return s;
}

SplitPower to_split(const PowerPlan& plan) {
  if (plan.p.size() != plan.rho.size()) {
    throw DimensionError("power plan arrays differ in length");
  }
  SplitPower split(plan.size());
  for (std::size_t i = 0; i < plan.size(); ++i) {
    split.a[i] = plan.p[i] * plan.rho[i];
    split.b[i] = plan.p[i] * (1.0 - plan.rho[i]);
  }
  return split;
}

PowerPlan to_plan(const SplitPower& split) {
  if (split.a.size() != split.b.size()) {
    throw DimensionError("split arrays differ in length");
  }
  PowerPlan plan(split.size());
  for (std::size_t i = 0; i < split.size(); ++i) {
    const double p = split.a[i] + split.b[i];
    plan.p[i] = p;
    plan.rho[i] = p > 0 ? std::clamp(split.a[i] / p, 0.0, 1.0) : 0.0;
  }
  return plan;
}

Distances compute_distances(const Trajectory& traj, const Scenario& scen) {
  check_lengths(traj, scen);
  const double h2 = scen.H * scen.H;
  Distances d;
  d.dI2.resize(traj.size());
  d.dE2.resize(traj.size());
  for (std::size_t i = 0; i < traj.size(); ++i) {
    const double x = traj.x[i];
    const double y = traj.y[i];
    d.dI2[i] = x * x + y * y + h2;
    d.dE2[i] = (x - scen.L) * (x - scen.L) + y * y + h2;
  }
  return d;
}

double secrecy_gap(double a, double b, double dI2, double dE2,
                   const LinkConstants& link) {
  const double k = link.snr_per_watt();
  return std::log1p(k * a / dI2) - std::log1p(k * a / (k * b + dE2));
}

LinkMetrics link_metrics(const Trajectory& traj, const PowerPlan& plan,
                         const Scenario& scen) {
  check_lengths(plan, scen);
  Distances d = compute_distances(traj, scen);
  const double k = scen.link().snr_per_watt();
  LinkMetrics m;
  const std::size_t n = traj.size();
  m.snrI.resize(n);
  m.sinrE.resize(n);
  m.rs.resize(n);
  for (std::size_t i = 0; i < n; ++i) {
    const double p = plan.p[i];
    const double rho = plan.rho[i];
    if (!std::isfinite(p) || !std::isfinite(rho) || !std::isfinite(d.dI2[i]) ||
        !std::isfinite(d.dE2[i])) {
      throw NumericError("non-finite input to secrecy rate");
    }
    m.snrI[i] = k * p * rho / d.dI2[i];
    m.sinrE[i] = k * p * rho / (k * (1.0 - rho) * p + d.dE2[i]);
    m.rs[i] = std::max(0.0, std::log1p(m.snrI[i]) - std::log1p(m.sinrE[i]));
  }
  m.dI2 = std::move(d.dI2);
  m.dE2 = std::move(d.dE2);
  return m;
}

SecrecyRates secrecy_rate(const Trajectory& traj, const PowerPlan& plan,
                          const Scenario& scen) {
  LinkMetrics m = link_metrics(traj, plan, scen);
  SecrecyRates r;
  double clamped = 0;
  double raw = 0;
  for (std::size_t i = 0; i < m.rs.size(); ++i) {
    clamped += m.rs[i];
    raw += std::log1p(m.snrI[i]) - std::log1p(m.sinrE[i]);
  }
  r.average = clamped / scen.T;
  r.unclamped_average = raw / scen.T;
  r.rs = std::move(m.rs);
  return r;
}

double mobility_energy(const Trajectory& traj, const Scenario& scen) {
  if (traj.x.size() < 2 || traj.x.size() != traj.y.size()) {
    throw DimensionError("mobility energy needs at least two slots");
  }
  double sum = 0;
  for (std::size_t i = 0; i + 1 < traj.size(); ++i) {
    const double dx = traj.x[i] - traj.x[i + 1];
    const double dy = traj.y[i] - traj.y[i + 1];
    sum += dx * dx + dy * dy;
  }
  return scen.kappa() * sum;
}

Trajectory straight_line(const Scenario& scen) {
  Trajectory traj(scen.T);
  const double steps = scen.T - 1;
  for (int i = 0; i < scen.T; ++i) {
    const double s = i / steps;
    traj.x[i] = scen.x1 + s * (scen.xT - scen.x1);
    traj.y[i] = scen.y1 + s * (scen.yT - scen.y1);
  }
  traj.x.back() = scen.xT;
  traj.y.back() = scen.yT;
  return traj;
}

bool FeasibilityReport::all_passed() const {
  return std::all_of(checks.begin(), checks.end(),
                     [](const ConstraintCheck& c) { return c.passed; });
}

const ConstraintCheck* FeasibilityReport::find(const std::string& name) const {
  for (const auto& c : checks) {
    if (c.name == name) return &c;
  }
  return nullptr;
}

std::string FeasibilityReport::summary() const {
  std::ostringstream os;
  for (const auto& c : checks) {
    os << c.name << '=' << (c.passed ? "ok" : "FAIL");
    if (!c.passed) os << '(' << c.worst_violation << ')';
    os << ' ';
  }
  return os.str();
}

namespace {

// Records max(0, value - limit) and fails when it exceeds rel_tol * scale.
class Checker {
 public:
  Checker(std::string name, double rel_tol) : rel_tol_(rel_tol) {
    check_.name = std::move(name);
  }
  void upper(double value, double limit, double scale) {
    const double excess = value - limit;
    if (!std::isfinite(value)) {
      check_.passed = false;
      check_.worst_violation = INFINITY;
      return;
    }
    if (excess > 0) {
      check_.worst_violation = std::max(check_.worst_violation, excess);
      if (excess > rel_tol_ * std::max(scale, 1e-300)) check_.passed = false;
    }
  }
  ConstraintCheck done() const { return check_; }

 private:
  ConstraintCheck check_;
  double rel_tol_;
};

void append_trajectory_checks(FeasibilityReport& report, const Trajectory& traj,
                              const Scenario& scen, double rel_tol) {
  check_lengths(traj, scen);
  const std::size_t n = traj.size();

  Checker endpoints("endpoints", rel_tol);
  const double scale = std::max({1.0, std::abs(scen.x1), std::abs(scen.y1),
                                 std::abs(scen.xT), std::abs(scen.yT)});
  endpoints.upper(std::abs(traj.x[0] - scen.x1), 0, scale);
  endpoints.upper(std::abs(traj.y[0] - scen.y1), 0, scale);
  endpoints.upper(std::abs(traj.x[n - 1] - scen.xT), 0, scale);
  endpoints.upper(std::abs(traj.y[n - 1] - scen.yT), 0, scale);
  report.checks.push_back(endpoints.done());

  Checker speed("speed", rel_tol);
  const double step = scen.max_step();
  for (std::size_t i = 0; i + 1 < n; ++i) {
    const double d = std::hypot(traj.x[i] - traj.x[i + 1],
                                traj.y[i] - traj.y[i + 1]);
    speed.upper(d, step, step);
  }
  report.checks.push_back(speed.done());

  Checker energy("energy", rel_tol);
  energy.upper(mobility_energy(traj, scen), scen.E_tr, scen.E_tr);
  report.checks.push_back(energy.done());
}

}  // namespace

FeasibilityReport check_trajectory(const Trajectory& traj, const Scenario& scen,
                                   double rel_tol) {
  FeasibilityReport report;
  append_trajectory_checks(report, traj, scen, rel_tol);
  return report;
}

FeasibilityReport check_feasibility(const Trajectory& traj,
                                    const PowerPlan& plan,
                                    const Scenario& scen, double rel_tol) {
  FeasibilityReport report;
  append_trajectory_checks(report, traj, scen, rel_tol);
  check_lengths(plan, scen);

  Checker ratio("rho", rel_tol);
  Checker peak("peak_power", rel_tol);
  Checker total("total_power", rel_tol);
  double sum = 0;
  for (std::size_t i = 0; i < plan.size(); ++i) {
    ratio.upper(plan.rho[i], 1.0, 1.0);
    ratio.upper(-plan.rho[i], 0.0, 1.0);
    peak.upper(plan.p[i], scen.P_max, scen.P_max);
    peak.upper(-plan.p[i], 0.0, scen.P_max);
    sum += plan.p[i];
  }
  total.upper(sum, scen.total_power(),
              std::max(scen.total_power(), scen.P_max));
  report.checks.push_back(ratio.done());
  report.checks.push_back(peak.done());
  report.checks.push_back(total.done());
  return report;
}

}  // namespace uavsec
