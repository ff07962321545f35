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

#include "uavsec/power_alloc.hpp"

#include <algorithm>
#include <array>
#include <cassert>
#include <cmath>

namespace uavsec {

namespace {

// Everything below works in "area" units: powers are multiplied by
// k = gamma0 / sigma2 so that k a and dI2 are both in m^2.
struct SlotTerms {
  double k;       // gamma0 / sigma2 [1/W]
  double dI2;
  double dE2;
  double denom_f;  // k (a_f + b_f) + dE2
  double slope;    // lambda + k / denom_f
};

SlotTerms make_terms(const SlotGeometry& slot, const SurrogatePoint& pt,
                     double lambda, const LinkConstants& link) {
  SlotTerms s;
  s.k = link.snr_per_watt();
  s.dI2 = slot.dI2;
  s.dE2 = slot.dE2;
  s.denom_f = s.k * (pt.a_f + pt.b_f) + slot.dE2;
  s.slope = lambda + s.k / s.denom_f;
  return s;
}

// g_hat(a, b) - lambda (a + b), dropping nothing.
double penalized(const SlotTerms& s, const SurrogatePoint& pt, double lambda,
                 double a, double b) {
  const double lin = s.k / s.denom_f * (a - pt.a_f + b - pt.b_f);
  return std::log1p(s.k * a / s.dI2) - std::log(s.denom_f) +
         std::log(s.k * b + s.dE2) - lin - lambda * (a + b);
}

bool better(const SlotSolution& cand, const SlotSolution& best) {
  if (cand.value != best.value) return cand.value > best.value;
  if (cand.a != best.a) return cand.a < best.a;
  return cand.b < best.b;
}

constexpr double kCaseTol = 1e-12;

}  // namespace

double surrogate_value(double a, double b, const SlotGeometry& slot,
                       const SurrogatePoint& pt, const LinkConstants& link) {
  const SlotTerms s = make_terms(slot, pt, 0.0, link);
  const double arg_b = s.k * b + s.dE2;
  const double arg_a = 1.0 + s.k * a / s.dI2;
  if (!(s.denom_f > 0) || !(arg_b > 0) || !(arg_a > 0)) {
    throw NumericError("surrogate log argument is not positive");
  }
  return penalized(s, pt, 0.0, a, b);
}

double inner_b(double a, const SlotGeometry& slot, const SurrogatePoint& pt,
               double lambda, double p_max, const LinkConstants& link) {
  const SlotTerms s = make_terms(slot, pt, lambda, link);
  const double b_s = 1.0 / s.slope - s.dE2 / s.k;
  if (b_s <= 0) return 0.0;
  const double cap = std::max(0.0, p_max - a);
  return b_s < cap ? b_s : cap;
}

SlotSolution solve_slot(const SlotGeometry& slot, const SurrogatePoint& pt,
                        double lambda, double p_max,
                        const LinkConstants& link) {
  const SlotTerms s = make_terms(slot, pt, lambda, link);
  const double tol = kCaseTol * p_max;
  const double inv = 1.0 / s.slope;
  const double b_s = inv - s.dE2 / s.k;
  // Stationary a with b held at an interior value or at zero.
  const double a_s = inv - s.dI2 / s.k;
  // Stationary a along the edge a + b = p_max.
  const double a_edge = 0.5 * ((s.dE2 - s.dI2) / s.k + p_max);

  std::array<SlotSolution, 5> cands;
  std::size_t n = 0;
  auto push = [&](double a, double b) {
    a = std::clamp(a, 0.0, p_max);
    b = std::clamp(b, 0.0, p_max - a);
    cands[n++] = {a, b, penalized(s, pt, lambda, a, b)};
  };

  // Case I, b at its stationary value.
  if (a_s > -tol && b_s > -tol && a_s + b_s < p_max + tol && a_s > 0 &&
      b_s > 0) {
    push(a_s, b_s);
  }
  // Case I, b clamped at zero.
  if (b_s <= tol && a_s > 0 && a_s < p_max + tol) push(a_s, 0.0);
  // Case II, a = 0.
  push(0.0, inner_b(0.0, slot, pt, lambda, p_max, link));
  // Case II, a on the peak-power edge.
  if (a_edge > 0 && a_edge < p_max && b_s >= p_max - a_edge - tol) {
    push(a_edge, p_max - a_edge);
  }
  // Corner a = p_max, where the inner maximizer is b = 0.
  push(p_max, 0.0);

  assert(n > 0);
  SlotSolution best = cands[0];
  for (std::size_t i = 1; i < n; ++i) {
    if (better(cands[i], best)) best = cands[i];
  }
  return best;
}

SlotSolution solve_slot_fixed_split(const SlotGeometry& slot,
                                    const SurrogatePoint& pt, double rho,
                                    double lambda, double p_max,
                                    const LinkConstants& link) {
  const SlotTerms s = make_terms(slot, pt, lambda, link);
  const double alpha = s.k * rho;
  const double beta = s.k * (1.0 - rho);
  const double c = s.slope;

  // Root of alpha/(dI2 + alpha p) + beta/(dE2 + beta p) = c, written as
  // qa p^2 + qb p + qc = 0.  The derivative is decreasing on the domain, so
  // the admissible root is the larger one.
  const double qa = c * alpha * beta;
  const double qb = c * (alpha * s.dE2 + beta * s.dI2) - 2.0 * alpha * beta;
  const double qc = c * s.dI2 * s.dE2 - alpha * s.dE2 - beta * s.dI2;
  double root = NAN;
  if (qa > 0) {
    const double disc = qb * qb - 4.0 * qa * qc;
    if (disc >= 0) {
      const double sq = std::sqrt(disc);
      root = qb <= 0 ? (-qb + sq) / (2.0 * qa) : (2.0 * qc) / (-qb - sq);
    }
  } else if (qb != 0) {
    root = -qc / qb;
  }

  auto eval = [&](double p) {
    return SlotSolution{rho * p, (1.0 - rho) * p,
                        penalized(s, pt, lambda, rho * p, (1.0 - rho) * p)};
  };
  SlotSolution best = eval(0.0);
  for (double p : {root, p_max}) {
    if (!(p > 0 && p <= p_max)) continue;
    const SlotSolution cand = eval(p);
    if (better(cand, best)) best = cand;
  }
  return best;
}

DualEvaluation eval_dual(double lambda, std::span<const SlotGeometry> slots,
                         std::span<const SurrogatePoint> pts,
                         const Scenario& scen,
                         std::optional<double> fixed_rho) {
  if (slots.size() != pts.size()) {
    throw DimensionError("slot and surrogate point counts differ");
  }
  const LinkConstants link = scen.link();
  DualEvaluation out;
  out.split = SplitPower(slots.size());
  double value = 0;
  double total = 0;
  for (std::size_t i = 0; i < slots.size(); ++i) {
    const SlotSolution sol =
        fixed_rho ? solve_slot_fixed_split(slots[i], pts[i], *fixed_rho,
                                           lambda, scen.P_max, link)
                  : solve_slot(slots[i], pts[i], lambda, scen.P_max, link);
    out.split.a[i] = sol.a;
    out.split.b[i] = sol.b;
    value += sol.value;
    total += sol.a + sol.b;
  }
  out.value = value + lambda * scen.total_power();
  out.total = total;
  return out;
}

std::vector<SlotGeometry> slot_geometry(const Trajectory& traj,
                                        const Scenario& scen) {
  const Distances d = compute_distances(traj, scen);
  std::vector<SlotGeometry> slots(d.dI2.size());
  for (std::size_t i = 0; i < slots.size(); ++i) {
    slots[i] = {d.dI2[i], d.dE2[i]};
  }
  return slots;
}

PowerStepResult power_step(const Trajectory& traj, const SplitPower& point,
                           const Scenario& scen,
                           const PowerStepOptions& options) {
  if (point.size() != static_cast<std::size_t>(scen.T)) {
    throw DimensionError("surrogate point length does not match T");
  }
  const std::vector<SlotGeometry> slots = slot_geometry(traj, scen);
  std::vector<SurrogatePoint> pts(slots.size());
  for (std::size_t i = 0; i < pts.size(); ++i) {
    pts[i] = {point.a[i], point.b[i]};
  }
  const double budget = scen.total_power();

  PowerStepResult result;
  auto evaluate = [&](double lambda) {
    ++result.dual_evaluations;
    return eval_dual(lambda, slots, pts, scen, options.fixed_rho);
  };

  DualEvaluation at = evaluate(0.0);
  double lambda = 0.0;
  if (at.total > budget) {
    double lo = 0.0;
    double hi = options.lambda_init;
    DualEvaluation at_hi = evaluate(hi);
    int doublings = 0;
    while (at_hi.total > budget) {
      if (++doublings > options.max_doublings) {
        throw ConvergenceError(
            "power step: no multiplier satisfies the total power budget");
      }
      lo = hi;
      hi *= 2.0;
      at_hi = evaluate(hi);
    }
    // Bisection on the subgradient P - sum(a + b); the right end of the
    // bracket always satisfies the budget and is what gets returned.
    while (budget - at_hi.total > options.power_rel_tol * budget &&
           hi - lo > options.lambda_rel_tol * hi) {
      const double mid = 0.5 * (lo + hi);
      if (mid <= lo || mid >= hi) break;
      DualEvaluation at_mid = evaluate(mid);
      if (at_mid.total <= budget) {
        hi = mid;
        at_hi = std::move(at_mid);
      } else {
        lo = mid;
      }
    }
    at = std::move(at_hi);
    lambda = hi;
  }

  result.lambda = lambda;
  result.total = at.total;
  result.split = std::move(at.split);
  const LinkConstants link = scen.link();
  double sur = 0;
  for (std::size_t i = 0; i < slots.size(); ++i) {
    sur += surrogate_value(result.split.a[i], result.split.b[i], slots[i],
                           pts[i], link);
  }
  result.surrogate = sur;
  return result;
}

}  // namespace uavsec
