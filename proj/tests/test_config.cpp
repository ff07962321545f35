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

#include <gtest/gtest.h>

#include <cmath>
#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <sstream>

#include <unistd.h>

#include "uavsec/config.hpp"
#include "uavsec/experiment.hpp"

namespace uavsec {
namespace {

namespace fs = std::filesystem;

const char* kNominalText = R"(# nominal, spelled out
L_m = 100
H_m = 100
x1_m = -200
y1_m = -150
xT_m = 1000
yT_m = -150
N_s = 125
delta_t_s = 0.5
vmax_mps = 12
mass_kg = 4
e_tr_kj = 19.40
gamma0_db = -36
noise_dbm_per_hz = -169
bandwidth_hz = 20e6
p_bar_dbm = 0
p_max_ratio = 4
schemes = full, ft
)";

// A 60-slot route short enough to solve in well under a second.
std::string small_spec(const fs::path& out, const std::string& extra = "") {
  return "base = nominal\nname = small\nN_s = 30\nxT_m = 100\n"
         "schemes = full, ft\nmax_outer = 3\noutput_dir = " +
         out.string() + "\n" + extra;
}

bool has_error(const ParseResult& r, const std::string& key,
               const std::string& fragment = "") {
  for (const Finding& f : r.findings) {
    if (f.level == Finding::Level::kError && f.key == key &&
        f.message.find(fragment) != std::string::npos) {
      return true;
    }
  }
  return false;
}

std::string without_line(const std::string& text, const std::string& prefix) {
  std::istringstream in(text);
  std::string line, out;
  while (std::getline(in, line)) {
    if (line.rfind(prefix, 0) != 0) out += line + "\n";
  }
  return out;
}

std::string slurp(const fs::path& p) {
  std::ifstream in(p, std::ios::binary);
  std::ostringstream os;
  os << in.rdbuf();
  return os.str();
}

class TempDir {
 public:
  TempDir() {
    static int counter = 0;
    path_ = fs::temp_directory_path() /
            ("uavsec_test_" + std::to_string(::getpid()) + "_" +
             std::to_string(counter++));
    fs::remove_all(path_);
    fs::create_directories(path_);
  }
  ~TempDir() { fs::remove_all(path_); }
  const fs::path& path() const { return path_; }

 private:
  fs::path path_;
};

fs::path write_file(const fs::path& dir, const std::string& name,
                    const std::string& text) {
  const fs::path p = dir / name;
  std::ofstream(p) << text;
  return p;
}

int cli(std::vector<std::string> args, std::string* out = nullptr,
        std::string* err = nullptr) {
  std::ostringstream o, e;
  const int code = run_cli(args, o, e);
  if (out) *out = o.str();
  if (err) *err = e.str();
  return code;
}

TEST(ParseSpec, ExplicitNominalConvertsUnits) {
  const ParseResult r = parse_spec(kNominalText);
  ASSERT_TRUE(r.ok());
  const Scenario& s = r.spec.scenario;
  const Scenario n = Scenario::nominal();
  EXPECT_EQ(s.T, 250);
  EXPECT_DOUBLE_EQ(s.E_tr, 19400.0);
  EXPECT_NEAR(s.P_bar, 1e-3, 1e-18);
  EXPECT_NEAR(s.P_max, 4e-3, 1e-18);
  EXPECT_NEAR(s.gamma0 / s.sigma2, n.gamma0 / n.sigma2, 1e-9 * n.gamma0 / n.sigma2);
  EXPECT_EQ(r.spec.schemes.size(), 2u);
  EXPECT_TRUE(r.spec.sweep.empty());
}

TEST(ParseSpec, MissingEnergyBudgetIsNamed) {
  const ParseResult r = parse_spec(without_line(kNominalText, "e_tr_kj"));
  EXPECT_FALSE(r.ok());
  EXPECT_TRUE(has_error(r, "e_tr_kj", "missing"));
}

TEST(ParseSpec, PeakBelowAverageRejected) {
  std::string text = without_line(kNominalText, "p_max_ratio");
  EXPECT_FALSE(parse_spec(text + "p_max_ratio = 0.5\n").ok());
  EXPECT_FALSE(parse_spec(text + "p_max_dbm = -3\n").ok());
  EXPECT_TRUE(parse_spec(text + "p_max_w = 0.004\n").ok());
}

TEST(ParseSpec, UnitlessKeysGetAHint) {
  const ParseResult r = parse_spec(std::string(kNominalText) + "E_tr = 19.4\n");
  EXPECT_FALSE(r.ok());
  EXPECT_TRUE(has_error(r, "E_tr", "e_tr_kj"));
}

TEST(ParseSpec, DuplicateAndMalformedEntries) {
  EXPECT_TRUE(has_error(parse_spec(std::string(kNominalText) + "H_m = 90\n"),
                        "H_m", "duplicate"));
  EXPECT_FALSE(parse_spec(std::string(kNominalText) + "just words\n").ok());
  const std::string base = "base = nominal\nschemes = full\n";
  EXPECT_TRUE(has_error(parse_spec(base + "L_m = inf\n"), "L_m"));
  EXPECT_TRUE(has_error(parse_spec(base + "N_s = 125.2\n"), "N_s"));
  EXPECT_TRUE(has_error(parse_spec(base + "p_bar_dbm = 0\np_bar_w = 1e-3\n"),
                        "p_bar_w"));
  EXPECT_TRUE(has_error(parse_spec(base + "sweep = H_m\nsweep_values = 1\n"),
                        "sweep"));
  EXPECT_TRUE(has_error(parse_spec(base + "admm_relaxation = 2.5\n"),
                        "admm_relaxation"));
}

TEST(ParseSpec, EmptySchemeListRejected) {
  EXPECT_TRUE(has_error(parse_spec("base = nominal\nschemes =\n"), "schemes"));
  EXPECT_TRUE(has_error(parse_spec("base = nominal\n"), "schemes"));
  EXPECT_TRUE(has_error(parse_spec("base = nominal\nschemes = full, best\n"),
                        "schemes"));
}

TEST(ParseSpec, SuspiciousUnitsWarn) {
  const ParseResult r =
      parse_spec("base = nominal\nschemes = full\ngamma0_db = 3\n");
  ASSERT_TRUE(r.ok());
  ASSERT_FALSE(r.findings.empty());
  EXPECT_EQ(r.findings[0].level, Finding::Level::kWarning);
}

TEST(ParseSpec, InfeasibleSweepPointIsAnError) {
  const ParseResult r = parse_spec(
      "base = nominal\nschemes = full\nsweep = e_tr_kj\n"
      "sweep_values = 19.4, 1\n");
  EXPECT_FALSE(r.ok());
}

TEST(Sweep, SlotModes) {
  ParseResult r = parse_spec(
      "base = nominal\nschemes = full\nsweep = N_s\nsweep_values = 110, 125\n");
  ASSERT_TRUE(r.ok());
  EXPECT_EQ(scenario_at(r.spec, 110).T, 220);
  EXPECT_DOUBLE_EQ(scenario_at(r.spec, 110).delta_t, 0.5);

  r = parse_spec(
      "base = nominal\nschemes = full\nslot_mode = fixed_slots\n"
      "e_tr_kj = 40\nsweep = T\nsweep_values = 250, 500\n");
  ASSERT_TRUE(r.ok());
  const Scenario s = scenario_at(r.spec, 500);
  EXPECT_EQ(s.T, 500);
  EXPECT_DOUBLE_EQ(s.duration(), 125.0);

  r = parse_spec(
      "base = nominal\nschemes = full\nsweep = p_bar_dbm\nsweep_values = 3\n");
  ASSERT_TRUE(r.ok());
  EXPECT_NEAR(scenario_at(r.spec, 3).P_max / scenario_at(r.spec, 3).P_bar, 4.0,
              1e-12);
  EXPECT_EQ(sweep_points(r.spec).size(), 1u);
}

TEST(Presets, AllValidateClean) {
  const std::vector<PresetInfo> presets = list_presets();
  EXPECT_GE(presets.size(), 9u);
  for (const PresetInfo& p : presets) {
    const ParseResult r = load_spec(p.path);
    EXPECT_TRUE(r.ok()) << p.name;
    for (const Finding& f : r.findings) ADD_FAILURE() << p.name << ": " << f.to_string();
    EXPECT_FALSE(p.description.empty()) << p.name;
    EXPECT_EQ(cli({"validate", p.name}), kExitOk) << p.name;
  }
}

TEST(Cli, ExitCodes) {
  TempDir tmp;
  std::string out, err;
  EXPECT_EQ(cli({"presets", "list"}, &out), kExitOk);
  EXPECT_NE(out.find("nominal"), std::string::npos);

  EXPECT_EQ(cli({}, &out, &err), kExitConfig);
  EXPECT_EQ(cli({"run", "no_such_preset"}, &out, &err), kExitConfig);
  EXPECT_NE(err.find("\"exit_code\":1"), std::string::npos) << err;

  const fs::path bad = write_file(tmp.path(), "bad.cfg",
                                  "base = nominal\nschemes =\noutput_dir = " +
                                      (tmp.path() / "bad_out").string() + "\n");
  EXPECT_EQ(cli({"validate", bad.string()}, &out, &err), kExitConfig);
  EXPECT_EQ(cli({"run", bad.string()}, &out, &err), kExitConfig);
  EXPECT_NE(err.find("\"kind\":\"config\""), std::string::npos) << err;
  EXPECT_FALSE(fs::exists(tmp.path() / "bad_out"));

  const fs::path stuck = write_file(
      tmp.path(), "stuck.cfg",
      small_spec(tmp.path() / "stuck_out", "admm_max_iter = 1\n"));
  EXPECT_EQ(cli({"run", stuck.string()}, &out, &err), kExitSolver);
  EXPECT_NE(err.find("convergence"), std::string::npos) << err;
  EXPECT_TRUE(fs::exists(tmp.path() / "stuck_out" / "summary.csv"));
}

TEST(Cli, DeterministicOutputsAreByteStable) {
  TempDir tmp;
  const fs::path spec = write_file(tmp.path(), "s.cfg", small_spec(tmp.path() / "a"));
  ASSERT_EQ(cli({"run", spec.string(), "-j", "2"}), kExitOk);
  ASSERT_EQ(cli({"run", spec.string(), "-o", (tmp.path() / "b").string(), "-j",
                 "1"}),
            kExitOk);
  for (const char* f : {"summary.csv", "trace_small_full.csv",
                        "traj_small_full.csv", "traj_small_ft.csv"}) {
    const std::string a = slurp(tmp.path() / "a" / f);
    EXPECT_FALSE(a.empty()) << f;
    EXPECT_EQ(a, slurp(tmp.path() / "b" / f)) << f;
  }
  EXPECT_TRUE(fs::exists(tmp.path() / "a" / "timings.csv"));
}

TEST(Cli, EmittedPlanIsFeasible) {
  TempDir tmp;
  const fs::path spec = write_file(tmp.path(), "s.cfg", small_spec(tmp.path()));
  ASSERT_EQ(cli({"run", spec.string()}), kExitOk);
  const ExperimentSpec es = load_spec(spec).spec;
  const Scenario scen = scenario_at(es, NAN);

  std::ifstream in(tmp.path() / "traj_small_full.csv");
  std::string line;
  std::getline(in, line);
  EXPECT_EQ(line, "slot,x_m,y_m,p_w,rho");
  Trajectory traj;
  PowerPlan plan;
  while (std::getline(in, line)) {
    std::istringstream row(line);
    std::string cell;
    std::vector<double> v;
    while (std::getline(row, cell, ',')) v.push_back(std::stod(cell));
    ASSERT_EQ(v.size(), 5u);
    traj.x.push_back(v[1]);
    traj.y.push_back(v[2]);
    plan.p.push_back(v[3]);
    plan.rho.push_back(v[4]);
  }
  ASSERT_EQ(traj.size(), static_cast<std::size_t>(scen.T));
  const FeasibilityReport rep = check_feasibility(traj, plan, scen);
  EXPECT_TRUE(rep.all_passed()) << rep.summary();
}

TEST(Experiment, ThreadsFromEnvironment) {
  ::setenv(kThreadsEnv, "3", 1);
  EXPECT_EQ(default_threads(), 3);
  ::setenv(kThreadsEnv, "zero", 1);
  EXPECT_GE(default_threads(), 1);
  ::unsetenv(kThreadsEnv);
  EXPECT_GE(default_threads(), 1);
}

TEST(Experiment, NumberFormat) {
  EXPECT_EQ(format_number(0.1), "0.1");
  EXPECT_EQ(format_number(1.0 / 3.0), "0.333333333333");
  EXPECT_EQ(format_number(123456789012345.0), "1.23456789012e+14");
  EXPECT_EQ(format_number(NAN), "nan");
  EXPECT_EQ(format_number(-INFINITY), "-inf");
}

}  // namespace
}  // namespace uavsec
