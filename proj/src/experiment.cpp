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

#include "uavsec/experiment.hpp"

#include <CLI11.hpp>
#include <algorithm>
#include <atomic>
#include <cmath>
#include <cstdio>
#include <cstdlib>
#include <fstream>
#include <json.hpp>
#include <ostream>
#include <thread>

#ifndef UAVSEC_PRESET_DIR
#define UAVSEC_PRESET_DIR "presets"
#endif

namespace uavsec {

namespace fs = std::filesystem;

namespace {

RunRecord execute(const ExperimentSpec& spec, Scheme scheme, double value) {
  RunRecord rec;
  rec.scheme = scheme;
  rec.sweep_value = value;
  rec.label = run_label(spec, scheme, value);
  try {
    rec.scenario = scenario_at(spec, value);
    rec.report = bcd_run(rec.scenario, scheme, spec.bcd);
  } catch (const InfeasibleScenario& e) {
    rec.error_kind = "infeasible";
    rec.error = e.what();
  } catch (const ConvergenceError& e) {
    rec.error_kind = "convergence";
    rec.error = e.what();
  } catch (const NumericError& e) {
    rec.error_kind = "numeric";
    rec.error = e.what();
  } catch (const Error& e) {
    rec.error_kind = "solver";
    rec.error = e.what();
  }
  return rec;
}

std::string opt_number(bool have, double v) {
  return have ? format_number(v) : std::string();
}

double per_outer_ms(const RunReport& r) {
  return r.outer_iterations > 0 ? r.times.total_ms / r.outer_iterations : 0.0;
}

void json_error(std::ostream& err, const std::string& kind, int code,
                const std::string& message,
                const std::vector<Finding>& findings = {}) {
  nlohmann::json j;
  j["status"] = "error";
  j["kind"] = kind;
  j["exit_code"] = code;
  j["message"] = message;
  if (!findings.empty()) {
    nlohmann::json arr = nlohmann::json::array();
    for (const Finding& f : findings) {
      if (f.level != Finding::Level::kError) continue;
      arr.push_back({{"line", f.line}, {"key", f.key}, {"message", f.message}});
    }
    j["findings"] = arr;
  }
  err << j.dump() << "\n";
}

// Resolves a spec argument: an existing file, else a preset name.
std::optional<fs::path> resolve_spec(const std::string& arg) {
  if (fs::is_regular_file(arg)) return fs::path(arg);
  for (const PresetInfo& p : list_presets()) {
    if (p.name == arg) return p.path;
  }
  return std::nullopt;
}

}  // namespace

bool ExperimentResult::ok() const {
  return std::all_of(runs.begin(), runs.end(),
                     [](const RunRecord& r) { return r.error_kind.empty(); });
}

std::string format_number(double v) {
  if (std::isnan(v)) return "nan";
  if (std::isinf(v)) return v > 0 ? "inf" : "-inf";
  char buf[64];
  std::snprintf(buf, sizeof buf, "%.12g", v);
  return buf;
}

std::string run_label(const ExperimentSpec& spec, Scheme scheme,
                      double sweep_value) {
  std::string label = spec.name + "_" + std::string(scheme_name(scheme));
  if (!spec.sweep.empty() && !std::isnan(sweep_value)) {
    label += "_" + spec.sweep + "_" + format_number(sweep_value);
  }
  return label;
}

int default_threads() {
  if (const char* env = std::getenv(kThreadsEnv)) {
    char* end = nullptr;
    const long v = std::strtol(env, &end, 10);
    if (end != env && *end == '\0' && v > 0) return static_cast<int>(v);
  }
  return std::max(1u, std::thread::hardware_concurrency());
}

ExperimentResult run_experiment(const ExperimentSpec& spec, int threads) {
  struct Job {
    Scheme scheme;
    double value;
  };
  std::vector<Job> jobs;
  for (double v : sweep_points(spec)) {
    for (Scheme s : spec.schemes) jobs.push_back({s, v});
  }

  ExperimentResult res;
  res.runs.resize(jobs.size());
  int n = threads > 0 ? threads : (spec.threads > 0 ? spec.threads
                                                    : default_threads());
  n = std::max(1, std::min<int>(n, static_cast<int>(jobs.size())));
  res.threads_used = n;

  // Each run is single-threaded; workers only pull whole runs, so results
  // do not depend on the worker count.
  std::atomic<std::size_t> next{0};
  auto worker = [&] {
    for (std::size_t i = next++; i < jobs.size(); i = next++) {
      res.runs[i] = execute(spec, jobs[i].scheme, jobs[i].value);
    }
  };
  if (n == 1) {
    worker();
  } else {
    std::vector<std::thread> pool;
    for (int t = 0; t < n; ++t) pool.emplace_back(worker);
    for (std::thread& t : pool) t.join();
  }
  return res;
}

void write_summary(std::ostream& out, const ExperimentSpec& spec,
                   const ExperimentResult& res) {
  out << "run,scheme,sweep,sweep_value,T,delta_t_s,rate_bits,objective_bits,"
         "outer_iterations,converged,admm_iterations_total,"
         "admm_iterations_max,rejected_trajectory_steps,feasible,status,"
         "power_ms,trajectory_ms,total_ms,per_outer_ms\n";
  for (const RunRecord& r : res.runs) {
    const bool ok = r.report.has_value();
    const bool swept = !spec.sweep.empty();
    out << r.label << ',' << scheme_name(r.scheme) << ',' << spec.sweep << ','
        << opt_number(swept, r.sweep_value) << ',';
    if (ok) {
      const RunReport& rep = *r.report;
      long total = 0;
      int most = 0;
      for (int a : rep.admm_iterations) {
        total += a;
        most = std::max(most, a);
      }
      out << r.scenario.T << ',' << format_number(r.scenario.delta_t) << ','
          << format_number(rep.final_rate) << ','
          << format_number(rep.final_unclamped) << ',' << rep.outer_iterations
          << ',' << (rep.converged ? "true" : "false") << ',' << total << ','
          << most << ',' << rep.rejected_trajectory_steps << ','
          << (rep.feasibility.all_passed() ? "true" : "false") << ",ok,";
      if (spec.deterministic) {
        out << ",,,";
      } else {
        out << format_number(rep.times.power_ms) << ','
            << format_number(rep.times.trajectory_ms) << ','
            << format_number(rep.times.total_ms) << ','
            << format_number(per_outer_ms(rep));
      }
    } else {
      out << ",,,,,,,,,," << r.error_kind << ",,,,";
    }
    out << '\n';
  }
}

void write_trace(std::ostream& out, const RunReport& rep) {
  out << "kind,outer,iteration,objective_bits,r_norm,s_norm\n";
  for (std::size_t k = 0; k < rep.objective_trace.size(); ++k) {
    out << "outer," << k << ",," << format_number(rep.objective_trace[k])
        << ",,\n";
  }
  for (std::size_t k = 0; k < rep.admm_r.size(); ++k) {
    const auto& r = rep.admm_r[k];
    const auto& s = rep.admm_s[k];
    for (std::size_t it = 0; it < r.size(); ++it) {
      out << "admm," << k + 1 << ',' << it + 1 << ",," << format_number(r[it])
          << ',' << format_number(s[it]) << '\n';
    }
  }
}

void write_trajectory(std::ostream& out, const RunReport& rep) {
  out << "slot,x_m,y_m,p_w,rho\n";
  for (std::size_t i = 0; i < rep.traj.size(); ++i) {
    out << i + 1 << ',' << format_number(rep.traj.x[i]) << ','
        << format_number(rep.traj.y[i]) << ',' << format_number(rep.plan.p[i])
        << ',' << format_number(rep.plan.rho[i]) << '\n';
  }
}

void write_outputs(const ExperimentSpec& spec, const ExperimentResult& res) {
  const fs::path dir(spec.output_dir);
  fs::create_directories(dir);
  auto open = [&](const std::string& name) {
    std::ofstream f(dir / name, std::ios::binary | std::ios::trunc);
    if (!f) throw ConfigError("cannot write " + (dir / name).string());
    return f;
  };
  {
    std::ofstream f = open("summary.csv");
    write_summary(f, spec, res);
  }
  if (spec.deterministic) {
    std::ofstream f = open("timings.csv");
    f << "run,power_ms,trajectory_ms,total_ms,per_outer_ms\n";
    for (const RunRecord& r : res.runs) {
      if (!r.report) continue;
      f << r.label << ',' << format_number(r.report->times.power_ms) << ','
        << format_number(r.report->times.trajectory_ms) << ','
        << format_number(r.report->times.total_ms) << ','
        << format_number(per_outer_ms(*r.report)) << '\n';
    }
  }
  for (const RunRecord& r : res.runs) {
    if (!r.report) continue;
    std::ofstream t = open("trace_" + r.label + ".csv");
    write_trace(t, *r.report);
    std::ofstream j = open("traj_" + r.label + ".csv");
    write_trajectory(j, *r.report);
  }
}

fs::path preset_dir() {
  if (const char* env = std::getenv("UAVSEC_PRESET_DIR")) return env;
  return UAVSEC_PRESET_DIR;
}

std::vector<PresetInfo> list_presets() {
  std::vector<PresetInfo> out;
  std::error_code ec;
  for (const auto& e : fs::directory_iterator(preset_dir(), ec)) {
    if (!e.is_regular_file() || e.path().extension() != ".cfg") continue;
    PresetInfo info;
    info.name = e.path().stem().string();
    info.path = e.path();
    std::ifstream in(e.path());
    std::string line;
    while (std::getline(in, line)) {
      if (line.rfind("#", 0) == 0) {
        const auto b = line.find_first_not_of("# ");
        info.description = b == std::string::npos ? "" : line.substr(b);
        break;
      }
    }
    out.push_back(std::move(info));
  }
  std::sort(out.begin(), out.end(),
            [](const PresetInfo& a, const PresetInfo& b) {
              return a.name < b.name;
            });
  return out;
}

int run_cli(const std::vector<std::string>& args, std::ostream& out,
            std::ostream& err) {
  CLI::App app{"UAV secrecy-rate planning experiments"};
  app.name("uavsec");
  app.require_subcommand(1);

  std::string spec_arg;
  std::string output_dir;
  int threads = 0;
  CLI::App* run = app.add_subcommand("run", "run every scheme and sweep point");
  run->add_option("spec", spec_arg, "spec file or preset name")->required();
  run->add_option("-o,--output-dir", output_dir, "override output_dir");
  run->add_option("-j,--threads", threads,
                  std::string("worker threads (default: ") + kThreadsEnv +
                      " or all cores)")
      ->check(CLI::NonNegativeNumber);
  CLI::App* validate =
      app.add_subcommand("validate", "lint a spec without running solvers");
  validate->add_option("spec", spec_arg, "spec file or preset name")
      ->required();
  CLI::App* presets = app.add_subcommand("presets", "bundled specs");
  presets->require_subcommand(1);
  presets->add_subcommand("list", "list bundled presets");

  try {
    std::vector<std::string> rev(args.rbegin(), args.rend());
    app.parse(rev);
  } catch (const CLI::CallForHelp& e) {
    app.exit(e, out, err);
    return kExitOk;
  } catch (const CLI::ParseError& e) {
    app.exit(e, out, err);
    return kExitConfig;
  }

  if (presets->parsed()) {
    for (const PresetInfo& p : list_presets()) {
      out << p.name << "\t" << p.description << "\n";
    }
    return kExitOk;
  }

  const std::optional<fs::path> path = resolve_spec(spec_arg);
  if (!path) {
    json_error(err, "config", kExitConfig,
               "no spec file or preset named '" + spec_arg + "'");
    return kExitConfig;
  }
  ParseResult parsed;
  try {
    parsed = load_spec(*path);
  } catch (const ConfigError& e) {
    json_error(err, "config", kExitConfig, e.what());
    return kExitConfig;
  }

  if (validate->parsed()) {
    for (const Finding& f : parsed.findings) out << f.to_string() << "\n";
    if (!parsed.ok()) return kExitConfig;
    out << "ok: " << path->string() << "\n";
    return kExitOk;
  }

  for (const Finding& f : parsed.findings) {
    if (f.level == Finding::Level::kWarning) err << f.to_string() << "\n";
  }
  if (!parsed.ok()) {
    json_error(err, "config", kExitConfig,
               "invalid spec: " + path->string(), parsed.findings);
    return kExitConfig;
  }
  ExperimentSpec& spec = parsed.spec;
  if (!output_dir.empty()) spec.output_dir = output_dir;

  const ExperimentResult res = run_experiment(spec, threads);
  try {
    write_outputs(spec, res);
  } catch (const std::exception& e) {
    json_error(err, "io", kExitConfig, e.what());
    return kExitConfig;
  }
  for (const RunRecord& r : res.runs) {
    if (r.report) {
      out << r.label << ": rate " << format_number(r.report->final_rate)
          << " bits/s/Hz, " << r.report->outer_iterations
          << " outer iterations\n";
    }
  }
  if (!res.ok()) {
    for (const RunRecord& r : res.runs) {
      if (!r.error_kind.empty()) {
        json_error(err, r.error_kind, kExitSolver, r.label + ": " + r.error);
      }
    }
    return kExitSolver;
  }
  return kExitOk;
}

}  // namespace uavsec
