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

#include "uavsec/config.hpp"

#include <algorithm>
#include <charconv>
#include <cmath>
#include <fstream>
#include <limits>
#include <map>
#include <optional>
#include <set>
#include <sstream>

namespace uavsec {

namespace {

constexpr double kNaN = std::numeric_limits<double>::quiet_NaN();

const std::vector<std::string>& physical_keys() {
  static const std::vector<std::string> keys = {
      "L_m",       "H_m",          "x1_m",      "y1_m",
      "xT_m",      "yT_m",         "N_s",       "delta_t_s",
      "vmax_mps",  "mass_kg",      "e_tr_kj",   "gamma0_db",
      "noise_dbm_per_hz",          "bandwidth_hz"};
  return keys;
}

const std::set<std::string>& known_keys() {
  static const std::set<std::string> keys = [] {
    std::set<std::string> k(physical_keys().begin(), physical_keys().end());
    for (const char* s :
         {"p_bar_dbm", "p_bar_w", "p_max_dbm", "p_max_w", "p_max_ratio",
          "base", "name", "schemes", "sweep", "sweep_values", "slot_mode",
          "speed_bound", "output_dir", "deterministic", "threads", "tau",
          "max_outer", "warm_start", "admm_delta", "admm_delta_scale",
          "admm_relaxation", "admm_eps", "admm_max_iter", "admm_adaptive"}) {
      k.insert(s);
    }
    return k;
  }();
  return keys;
}

// Unit-less spellings people reach for, mapped to the real key.
const std::map<std::string, std::string>& unit_hints() {
  static const std::map<std::string, std::string> hints = {
      {"l", "L_m"},          {"h", "H_m"},
      {"x1", "x1_m"},        {"y1", "y1_m"},
      {"xt", "xT_m"},        {"yt", "yT_m"},
      {"n", "N_s"},          {"delta_t", "delta_t_s"},
      {"vmax", "vmax_mps"},  {"m", "mass_kg"},
      {"mass", "mass_kg"},   {"e_tr", "e_tr_kj"},
      {"e_tr_j", "e_tr_kj"}, {"gamma0", "gamma0_db"},
      {"p_bar", "p_bar_dbm or p_bar_w"},
      {"p_max", "p_max_dbm, p_max_w or p_max_ratio"},
      {"bandwidth", "bandwidth_hz"},
      {"noise", "noise_dbm_per_hz"}};
  return hints;
}

const std::vector<std::string>& sweep_keys() {
  static const std::vector<std::string> keys = {"L_m", "N_s", "T",
                                                "p_bar_dbm", "e_tr_kj"};
  return keys;
}

std::string trim(std::string_view s) {
  const auto b = s.find_first_not_of(" \t\r");
  if (b == std::string_view::npos) return {};
  const auto e = s.find_last_not_of(" \t\r");
  return std::string(s.substr(b, e - b + 1));
}

std::string lower(std::string s) {
  std::transform(s.begin(), s.end(), s.begin(),
                 [](unsigned char c) { return std::tolower(c); });
  return s;
}

std::optional<double> parse_number(const std::string& v) {
  double out = 0;
  const char* first = v.data();
  const char* last = v.data() + v.size();
  if (first != last && *first == '+') ++first;
  const auto [ptr, ec] = std::from_chars(first, last, out);
  if (ec != std::errc() || ptr != last || !std::isfinite(out)) {
    return std::nullopt;
  }
  return out;
}

std::vector<std::string> split_list(const std::string& v) {
  std::vector<std::string> out;
  std::stringstream ss(v);
  std::string item;
  while (std::getline(ss, item, ',')) {
    item = trim(item);
    if (!item.empty()) out.push_back(item);
  }
  return out;
}

struct Entry {
  std::string value;
  int line = 0;
};

class Parser {
 public:
  explicit Parser(std::vector<Finding>& findings) : findings_(findings) {}

  void error(int line, std::string key, std::string msg) {
    findings_.push_back({Finding::Level::kError, line, std::move(key),
                         std::move(msg)});
  }
  void warn(int line, std::string key, std::string msg) {
    findings_.push_back({Finding::Level::kWarning, line, std::move(key),
                         std::move(msg)});
  }

  void read(std::string_view text) {
    std::istringstream in{std::string(text)};
    std::string raw;
    int line_no = 0;
    while (std::getline(in, raw)) {
      ++line_no;
      const auto hash = raw.find('#');
      const std::string line = trim(raw.substr(0, hash));
      if (line.empty()) continue;
      const auto eq = line.find('=');
      if (eq == std::string::npos) {
        error(line_no, "", "expected 'key = value', got '" + line + "'");
        continue;
      }
      const std::string key = trim(line.substr(0, eq));
      const std::string value = trim(line.substr(eq + 1));
      if (key.empty()) {
        error(line_no, "", "missing key before '='");
        continue;
      }
      if (!known_keys().count(key)) {
        const auto hint = unit_hints().find(lower(key));
        if (hint != unit_hints().end()) {
          error(line_no, key,
                "unknown key; physical keys carry a unit suffix, use " +
                    hint->second);
        } else {
          error(line_no, key, "unknown key");
        }
        continue;
      }
      if (entries_.count(key)) {
        error(line_no, key,
              "duplicate key (first set on line " +
                  std::to_string(entries_[key].line) + ")");
        continue;
      }
      entries_[key] = {value, line_no};
    }
  }

  bool has(const std::string& key) const { return entries_.count(key) > 0; }
  int line_of(const std::string& key) const {
    const auto it = entries_.find(key);
    return it == entries_.end() ? 0 : it->second.line;
  }
  const std::string& raw(const std::string& key) const {
    return entries_.at(key).value;
  }

  std::optional<double> number(const std::string& key) {
    if (!has(key)) return std::nullopt;
    const auto v = parse_number(raw(key));
    if (!v) error(line_of(key), key, "not a finite number: '" + raw(key) + "'");
    return v;
  }

  std::optional<int> integer(const std::string& key) {
    const auto v = number(key);
    if (!v) return std::nullopt;
    if (*v != std::floor(*v) || std::abs(*v) > 1e9) {
      error(line_of(key), key, "expected an integer");
      return std::nullopt;
    }
    return static_cast<int>(*v);
  }

  std::optional<bool> boolean(const std::string& key) {
    if (!has(key)) return std::nullopt;
    const std::string v = lower(raw(key));
    if (v == "true" || v == "1" || v == "yes" || v == "on") return true;
    if (v == "false" || v == "0" || v == "no" || v == "off") return false;
    error(line_of(key), key, "expected true or false");
    return std::nullopt;
  }

 private:
  std::vector<Finding>& findings_;
  std::map<std::string, Entry> entries_;
};

// Distance [m] of the straight line, for the feasibility pre-check.
FeasibilityReport straight_line_report(const Scenario& s) {
  return check_trajectory(straight_line(s), s);
}

}  // namespace

std::string Finding::to_string() const {
  std::string out = level == Level::kError ? "error" : "warning";
  if (line > 0) out += ": line " + std::to_string(line);
  if (!key.empty()) out += ": " + key;
  out += ": " + message;
  return out;
}

bool ParseResult::ok() const {
  return std::none_of(findings.begin(), findings.end(), [](const Finding& f) {
    return f.level == Finding::Level::kError;
  });
}

ParseResult parse_spec(std::string_view text) {
  ParseResult res;
  Parser p(res.findings);
  p.read(text);
  ExperimentSpec& spec = res.spec;
  Scenario& s = spec.scenario;

  bool from_base = false;
  if (p.has("base")) {
    if (p.raw("base") == "nominal") {
      s = Scenario::nominal();
      spec.p_max_ratio = 4;
      from_base = true;
    } else {
      p.error(p.line_of("base"), "base", "only 'nominal' is available");
    }
  }

  for (const std::string& key : physical_keys()) {
    if (!p.has(key) && !from_base) {
      p.error(0, key, "missing required key");
    }
  }
  auto set = [&](const char* key, double& field, double scale = 1.0) {
    if (auto v = p.number(key)) field = *v * scale;
  };
  set("L_m", s.L);
  set("H_m", s.H);
  set("x1_m", s.x1);
  set("y1_m", s.y1);
  set("xT_m", s.xT);
  set("yT_m", s.yT);
  set("vmax_mps", s.Vmax);
  set("mass_kg", s.M);
  set("e_tr_kj", s.E_tr, 1e3);

  // Slot count from N and delta_t.
  double n_s = from_base ? s.duration() : kNaN;
  set("N_s", n_s);
  set("delta_t_s", s.delta_t);
  if (std::isfinite(n_s) && s.delta_t > 0) {
    const double slots = n_s / s.delta_t;
    if (std::abs(slots - std::round(slots)) > 1e-9 * std::max(1.0, slots)) {
      p.error(p.line_of("N_s"), "N_s",
              "N_s / delta_t_s is not an integral slot count");
    } else {
      s.T = static_cast<int>(std::round(slots));
    }
  }

  // Channel.
  {
    double g_db = from_base ? 10.0 * std::log10(s.gamma0) : kNaN;
    double n0 = kNaN, bw = kNaN;
    const bool have_noise = p.has("noise_dbm_per_hz") || p.has("bandwidth_hz");
    if (auto v = p.number("gamma0_db")) g_db = *v;
    if (auto v = p.number("noise_dbm_per_hz")) n0 = *v;
    if (auto v = p.number("bandwidth_hz")) bw = *v;
    if (std::isfinite(g_db)) {
      s.gamma0 = db_to_linear(g_db);
      if (g_db > 0) {
        p.warn(p.line_of("gamma0_db"), "gamma0_db",
               "positive channel gain in dB; was a linear value entered?");
      }
    }
    if (have_noise) {
      if (from_base) {
        if (!std::isfinite(n0)) n0 = -169;
        if (!std::isfinite(bw)) bw = 20e6;
      }
      if (std::isfinite(n0) && std::isfinite(bw)) {
        if (bw <= 0) {
          p.error(p.line_of("bandwidth_hz"), "bandwidth_hz",
                  "bandwidth must be positive");
        } else {
          s.sigma2 = noise_power_watts(n0, bw);
        }
        if (n0 > -100) {
          p.warn(p.line_of("noise_dbm_per_hz"), "noise_dbm_per_hz",
                 "noise density above -100 dBm/Hz; check the unit");
        }
      }
    }
  }

  // Power: exactly one spelling each.
  {
    const int n_bar = p.has("p_bar_dbm") + p.has("p_bar_w");
    if (n_bar > 1) {
      p.error(p.line_of("p_bar_w"), "p_bar_w",
              "p_bar given both in dBm and in watts");
    } else if (n_bar == 0 && !from_base) {
      p.error(0, "p_bar_dbm", "missing required key (or p_bar_w)");
    }
    if (auto v = p.number("p_bar_dbm")) {
      s.P_bar = dbm_to_watts(*v);
      if (*v > 40) {
        p.warn(p.line_of("p_bar_dbm"), "p_bar_dbm",
               "above 40 dBm (10 W); was a linear value entered?");
      }
    }
    if (auto v = p.number("p_bar_w")) s.P_bar = *v;

    const int n_max = p.has("p_max_dbm") + p.has("p_max_w") +
                      p.has("p_max_ratio");
    if (n_max > 1) {
      p.error(p.line_of("p_max_ratio"), "p_max_ratio",
              "peak power given more than once (dBm, watts, ratio)");
    } else if (n_max == 0 && !from_base) {
      p.error(0, "p_max_ratio", "missing required key (or p_max_dbm/p_max_w)");
    }
    if (auto v = p.number("p_max_dbm")) {
      s.P_max = dbm_to_watts(*v);
      spec.p_max_ratio = 0;
    }
    if (auto v = p.number("p_max_w")) {
      s.P_max = *v;
      spec.p_max_ratio = 0;
    }
    if (auto v = p.number("p_max_ratio")) {
      if (*v < 1) {
        p.error(p.line_of("p_max_ratio"), "p_max_ratio",
                "P_max must be at least P_bar (ratio >= 1)");
      }
      spec.p_max_ratio = *v;
    }
    if (spec.p_max_ratio > 0) s.P_max = spec.p_max_ratio * s.P_bar;
  }

  if (p.has("speed_bound")) {
    const std::string v = p.raw("speed_bound");
    if (v == "per_slot") {
      s.speed_bound = SpeedBound::kPerSlot;
    } else if (v == "literal") {
      s.speed_bound = SpeedBound::kLiteral;
    } else {
      p.error(p.line_of("speed_bound"), "speed_bound",
              "expected per_slot or literal");
    }
  }
  if (p.has("slot_mode")) {
    const std::string v = p.raw("slot_mode");
    if (v == "fixed_delta_t") {
      spec.slot_mode = SlotMode::kFixedDeltaT;
    } else if (v == "fixed_slots") {
      spec.slot_mode = SlotMode::kFixedSlots;
    } else {
      p.error(p.line_of("slot_mode"), "slot_mode",
              "expected fixed_delta_t or fixed_slots");
    }
  }

  // Schemes.
  if (!p.has("schemes")) {
    p.error(0, "schemes", "missing required key");
  } else {
    for (const std::string& name : split_list(p.raw("schemes"))) {
      if (auto sc = parse_scheme(name)) {
        if (std::find(spec.schemes.begin(), spec.schemes.end(), *sc) ==
            spec.schemes.end()) {
          spec.schemes.push_back(*sc);
        }
      } else {
        p.error(p.line_of("schemes"), "schemes",
                "unknown scheme '" + name + "' (full, ft, nps, noan)");
      }
    }
    if (spec.schemes.empty()) {
      p.error(p.line_of("schemes"), "schemes", "scheme list is empty");
    }
  }

  // Sweep.
  if (p.has("sweep")) {
    spec.sweep = p.raw("sweep");
    if (std::find(sweep_keys().begin(), sweep_keys().end(), spec.sweep) ==
        sweep_keys().end()) {
      p.error(p.line_of("sweep"), "sweep",
              "cannot sweep '" + spec.sweep +
                  "' (L_m, N_s, T, p_bar_dbm, e_tr_kj)");
    }
    if (!p.has("sweep_values")) {
      p.error(p.line_of("sweep"), "sweep_values",
              "missing; required with sweep");
    }
  }
  if (p.has("sweep_values")) {
    if (!p.has("sweep")) {
      p.error(p.line_of("sweep_values"), "sweep_values",
              "given without a sweep key");
    }
    for (const std::string& item : split_list(p.raw("sweep_values"))) {
      const auto v = parse_number(item);
      if (!v) {
        p.error(p.line_of("sweep_values"), "sweep_values",
                "not a finite number: '" + item + "'");
        continue;
      }
      const bool positive = spec.sweep == "N_s" || spec.sweep == "T" ||
                            spec.sweep == "e_tr_kj";
      if (positive && *v <= 0) {
        p.error(p.line_of("sweep_values"), "sweep_values",
                "value " + item + " must be positive for " + spec.sweep);
        continue;
      }
      if (spec.sweep == "T" && (*v != std::floor(*v) || *v < 2)) {
        p.error(p.line_of("sweep_values"), "sweep_values",
                "slot counts must be integers >= 2");
        continue;
      }
      spec.sweep_values.push_back(*v);
    }
    if (spec.sweep_values.empty()) {
      p.error(p.line_of("sweep_values"), "sweep_values", "no values given");
    }
  }

  // Run and solver settings.
  if (p.has("name")) {
    spec.name = p.raw("name");
    if (spec.name.empty() ||
        spec.name.find_first_of("/\\ ,\"") != std::string::npos) {
      p.error(p.line_of("name"), "name",
              "must be non-empty without spaces, commas, quotes or slashes");
    }
  }
  if (p.has("output_dir")) spec.output_dir = p.raw("output_dir");
  if (auto v = p.boolean("deterministic")) spec.deterministic = *v;
  if (auto v = p.integer("threads")) {
    if (*v < 0) p.error(p.line_of("threads"), "threads", "must be >= 0");
    spec.threads = std::max(0, *v);
  }
  BcdConfig& b = spec.bcd;
  if (auto v = p.number("tau")) {
    if (*v <= 0) p.error(p.line_of("tau"), "tau", "must be positive");
    b.tau = *v;
  }
  if (auto v = p.integer("max_outer")) {
    if (*v < 1) p.error(p.line_of("max_outer"), "max_outer", "must be >= 1");
    b.max_outer = *v;
  }
  if (auto v = p.boolean("warm_start")) b.warm_start_duals = *v;
  if (auto v = p.number("admm_delta")) {
    if (*v <= 0) p.error(p.line_of("admm_delta"), "admm_delta", "must be > 0");
    b.admm.delta = *v;
  }
  if (auto v = p.number("admm_delta_scale")) {
    if (*v < 0) {
      p.error(p.line_of("admm_delta_scale"), "admm_delta_scale",
              "must be >= 0 (0 uses admm_delta)");
    }
    b.admm.delta_scale = *v;
  }
  if (auto v = p.number("admm_relaxation")) {
    if (*v <= 0 || *v >= 2) {
      p.error(p.line_of("admm_relaxation"), "admm_relaxation",
              "must lie in (0, 2)");
    }
    b.admm.relaxation = *v;
  }
  if (auto v = p.number("admm_eps")) {
    if (*v <= 0) p.error(p.line_of("admm_eps"), "admm_eps", "must be > 0");
    b.admm.eps = *v;
  }
  if (auto v = p.integer("admm_max_iter")) {
    if (*v < 1) {
      p.error(p.line_of("admm_max_iter"), "admm_max_iter", "must be >= 1");
    }
    b.admm.max_iter = *v;
  }
  if (auto v = p.boolean("admm_adaptive")) b.admm.adaptive_penalty = *v;

  if (res.ok()) {
    for (Finding& f : check_sweep(spec)) res.findings.push_back(std::move(f));
  }
  return res;
}

ParseResult load_spec(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw ConfigError("cannot read spec file: " + path.string());
  std::ostringstream ss;
  ss << in.rdbuf();
  return parse_spec(ss.str());
}

std::vector<double> sweep_points(const ExperimentSpec& spec) {
  if (spec.sweep.empty()) return {kNaN};
  return spec.sweep_values;
}

Scenario scenario_at(const ExperimentSpec& spec, double v) {
  Scenario s = spec.scenario;
  if (spec.sweep.empty() || std::isnan(v)) return s;
  const double n_s = s.duration();
  if (spec.sweep == "L_m") {
    s.L = v;
  } else if (spec.sweep == "e_tr_kj") {
    s.E_tr = v * 1e3;
  } else if (spec.sweep == "p_bar_dbm") {
    s.P_bar = dbm_to_watts(v);
    if (spec.p_max_ratio > 0) s.P_max = spec.p_max_ratio * s.P_bar;
  } else if (spec.sweep == "N_s") {
    if (spec.slot_mode == SlotMode::kFixedDeltaT) {
      const double slots = v / s.delta_t;
      if (std::abs(slots - std::round(slots)) > 1e-9 * std::max(1.0, slots)) {
        throw ConfigError("N_s = " + std::to_string(v) +
                          " is not a whole number of slots");
      }
      s.T = static_cast<int>(std::round(slots));
    } else {
      s.delta_t = v / s.T;
    }
  } else if (spec.sweep == "T") {
    s.T = static_cast<int>(v);
    if (spec.slot_mode == SlotMode::kFixedSlots) s.delta_t = n_s / s.T;
  } else {
    throw ConfigError("unknown sweep key: " + spec.sweep);
  }
  return s;
}

std::vector<Finding> check_sweep(const ExperimentSpec& spec) {
  std::vector<Finding> out;
  for (double v : sweep_points(spec)) {
    const std::string where =
        spec.sweep.empty() ? std::string("scenario")
                           : spec.sweep + " = " + [&] {
                               std::ostringstream os;
                               os << v;
                               return os.str();
                             }();
    Scenario s;
    try {
      s = scenario_at(spec, v);
      s.validate();
    } catch (const Error& e) {
      out.push_back({Finding::Level::kError, 0, where, e.what()});
      continue;
    }
    const FeasibilityReport rep = straight_line_report(s);
    if (!rep.all_passed()) {
      out.push_back({Finding::Level::kError, 0, where,
                     "straight-line initialization infeasible: " +
                         rep.summary()});
    }
  }
  return out;
}

}  // namespace uavsec
