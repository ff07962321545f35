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

// Problem constants, plan representations and the link/secrecy physics of a
// single UAV transmitting to a ground receiver (Bob at the origin) while a
// ground eavesdropper (Eve at (L, 0)) listens.  All quantities are SI and
// linear; dB inputs are converted once, at ingestion.

#pragma once

#include <span>
#include <stdexcept>
#include <string>
#include <vector>

namespace uavsec {

// Error hierarchy shared by every module.
class Error : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};
class DimensionError : public Error {
 public:
  using Error::Error;
};
class NumericError : public Error {
 public:
  using Error::Error;
};
class InvalidScenario : public Error {
 public:
  using Error::Error;
};
class InfeasibleScenario : public Error {
 public:
  using Error::Error;
};
class ConvergenceError : public Error {
 public:
  using Error::Error;
};

double db_to_linear(double db);
double dbm_to_watts(double dbm);
// Noise power [W] for a density in dBm/Hz over a bandwidth in Hz.
double noise_power_watts(double density_dbm_per_hz, double bandwidth_hz);

// How the per-slot displacement is bounded.  kPerSlot uses Vmax * delta_t
// metres per slot, kLiteral uses Vmax metres per slot.
enum class SpeedBound { kPerSlot, kLiteral };

struct LinkConstants {
  double gamma0 = 0;  // channel power gain at 1 m
  double sigma2 = 0;  // receiver noise power [W]
  // Reference SNR per watt at 1 m, i.e. gamma0 / sigma2.
  double snr_per_watt() const { return gamma0 / sigma2; }
};

struct Scenario {
  double L = 0;  // Bob-Eve ground distance [m]
  double H = 0;  // flight altitude [m]
  double x1 = 0, y1 = 0;  // initial position [m]
  double xT = 0, yT = 0;  // final position [m]
  int T = 0;              // number of slots
  double delta_t = 0;     // slot length [s]
  double Vmax = 0;        // [m/s]
  double M = 0;           // mass incl. payload [kg]
  double E_tr = 0;        // mobility energy budget [J]
  double gamma0 = 0;
  double sigma2 = 0;      // [W]
  double P_bar = 0;       // average power budget [W]
  double P_max = 0;       // peak power budget [W]
  SpeedBound speed_bound = SpeedBound::kPerSlot;

  double duration() const { return T * delta_t; }
  double kappa() const { return 0.5 * M * delta_t; }
  double total_power() const { return T * P_bar; }
  // Largest admissible displacement between consecutive slots [m].
  double max_step() const {
    return speed_bound == SpeedBound::kPerSlot ? Vmax * delta_t : Vmax;
  }
  // Budget on the sum of squared displacements [m^2].
  double displacement_budget() const { return E_tr / kappa(); }
  LinkConstants link() const { return {gamma0, sigma2}; }

  // Throws InvalidScenario naming the first violated invariant.
  void validate() const;

  // The nominal simulation setup: L = H = 100 m, Vmax = 12 m/s, M = 4 kg,
  // N = 125 s at 0.5 s slots, P_bar = 0 dBm, P_max = 4 P_bar,
  // E_tr = 19.40 kJ, gamma0 = -36 dB, -169 dBm/Hz over 20 MHz.
  static Scenario nominal();
};

struct Trajectory {
  std::vector<double> x;
  std::vector<double> y;

  Trajectory() = default;
  explicit Trajectory(std::size_t n) : x(n, 0.0), y(n, 0.0) {}
  std::size_t size() const { return x.size(); }
};

// Per-slot transmit power and information fraction rho.
struct PowerPlan {
  std::vector<double> p;
  std::vector<double> rho;

  PowerPlan() = default;
  explicit PowerPlan(std::size_t n) : p(n, 0.0), rho(n, 0.0) {}
  std::size_t size() const { return p.size(); }
};

// (a, b) = (p rho, p (1 - rho)): information and artificial-noise power.
struct SplitPower {
  std::vector<double> a;
  std::vector<double> b;

  SplitPower() = default;
  explicit SplitPower(std::size_t n) : a(n, 0.0), b(n, 0.0) {}
  std::size_t size() const { return a.size(); }
};

SplitPower to_split(const PowerPlan& plan);
// rho is set to 0 wherever a + b == 0.
PowerPlan to_plan(const SplitPower& split);

struct Distances {
  std::vector<double> dI2;  // squared UAV-Bob distance
  std::vector<double> dE2;  // squared UAV-Eve distance
};

struct LinkMetrics {
  std::vector<double> dI2;
  std::vector<double> dE2;
  std::vector<double> snrI;
  std::vector<double> sinrE;
  std::vector<double> rs;  // clamped per-slot secrecy rate [nats]
};

struct SecrecyRates {
  std::vector<double> rs;      // clamped per-slot rate [nats]
  double average = 0;          // (1/T) sum of clamped rates [nats]
  double unclamped_average = 0;  // same without the [.]^+ [nats]
};

Distances compute_distances(const Trajectory& traj, const Scenario& scen);
LinkMetrics link_metrics(const Trajectory& traj, const PowerPlan& plan,
                         const Scenario& scen);
SecrecyRates secrecy_rate(const Trajectory& traj, const PowerPlan& plan,
                          const Scenario& scen);

// Unclamped per-slot rate in the (a, b) parameterization:
//   log(1 + g a / (dI2 s2)) - log(1 + g a / (g b + s2 dE2)).
double secrecy_gap(double a, double b, double dI2, double dE2,
                   const LinkConstants& link);

double mobility_energy(const Trajectory& traj, const Scenario& scen);

constexpr double kNatsPerBit = 0.69314718055994530942;
inline double nats_to_bits(double nats) { return nats / kNatsPerBit; }

// Straight line from (x1, y1) to (xT, yT) at constant speed.
Trajectory straight_line(const Scenario& scen);

struct ConstraintCheck {
  std::string name;
  bool passed = true;
  double worst_violation = 0;  // in the constraint's own units, >= 0
};

struct FeasibilityReport {
  std::vector<ConstraintCheck> checks;
  bool all_passed() const;
  const ConstraintCheck* find(const std::string& name) const;
  std::string summary() const;
};

constexpr double kFeasibilityTol = 1e-9;

// Endpoints, per-slot speed, mobility energy, 0 <= rho <= 1,
// 0 <= p <= P_max and sum p <= T P_bar, each up to a relative tolerance.
FeasibilityReport check_feasibility(const Trajectory& traj,
                                    const PowerPlan& plan,
                                    const Scenario& scen,
                                    double rel_tol = kFeasibilityTol);
// Trajectory-only subset of check_feasibility.
FeasibilityReport check_trajectory(const Trajectory& traj,
                                   const Scenario& scen,
                                   double rel_tol = kFeasibilityTol);

}  // namespace uavsec
