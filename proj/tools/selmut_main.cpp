// Command line driver: lattice runs, limit-equation solves, structural
// checks and convergence sweeps, all described by one JSON config.

#include <algorithm>
#include <cstdio>
#include <map>
#include <stdexcept>
#include <string>
#include <vector>

#include <CLI11.hpp>

#include "selmut/analysis.hpp"
#include "selmut/config.hpp"
#include "selmut/dynamics.hpp"
#include "selmut/hj.hpp"
#include "selmut/io.hpp"
#include "selmut/kernel.hpp"
#include "selmut/lattice.hpp"
#include "selmut/parallel.hpp"
#include "selmut/rates.hpp"

namespace {

using namespace selmut;

struct CommonOpts {
  std::string config_path;
  std::string output_path;
  int threads = 0;
  bool strict = false;
  bool no_timing = false;
};

void add_common(CLI::App* cmd, CommonOpts& o, const char* output_help) {
  cmd->add_option("--config", o.config_path,
                  "JSON experiment description (every key optional; defaults used when omitted)")
      ->check(CLI::ExistingFile);
  cmd->add_option("--output", o.output_path, output_help)->required();
  cmd->add_option("--threads", o.threads, "worker threads, 0 = all hardware threads")
      ->check(CLI::NonNegativeNumber);
  cmd->add_flag("--strict", o.strict, "treat unknown configuration keys as errors");
  cmd->add_flag("--no-timing", o.no_timing,
                "report zero wall times so repeated runs are byte-identical");
}

ExperimentConfig load(const CommonOpts& o) {
  ExperimentConfig cfg;
  if (!o.config_path.empty()) {
    ParsedConfig parsed = load_config(o.config_path, o.strict);
    for (const std::string& w : parsed.warnings) std::fprintf(stderr, "warning: %s\n", w.c_str());
    cfg = parsed.config;
  }
  if (o.no_timing) cfg.timing = false;
  return cfg;
}

LatticeField sampled_initial(const ExperimentConfig& cfg, const ScalingParams& scaling,
                             const TraitWindow& win) {
  CheckReport val = validate_initial(cfg.initial, scaling, win);
  if (!val.passed)
    throw std::invalid_argument("initial data fails its envelope/slope validation (margin " +
                                std::to_string(val.worst_margin) + " > tolerance " +
                                std::to_string(val.tolerance) + ")");
  return sample_initial(cfg.initial, win);
}

void print_reports(const std::vector<CheckReport>& reports) {
  for (const CheckReport& rep : reports) {
    std::string loc;
    for (const auto& [key, value] : rep.worst_location) {
      if (!loc.empty()) loc += ", ";
      char buf[64];
      std::snprintf(buf, sizeof buf, "%s=%.6g", key.c_str(), value);
      loc += buf;
    }
    std::printf("check %-12s %s  (worst margin %.6g, tolerance %.3g%s%s)\n", rep.check_id.c_str(),
                rep.passed ? "pass" : "FAIL", rep.worst_margin, rep.tolerance,
                loc.empty() ? "" : " at ", loc.c_str());
  }
}

bool all_passed(const std::vector<CheckReport>& reports) {
  return std::all_of(reports.begin(), reports.end(),
                     [](const CheckReport& r) { return r.passed; });
}

int cmd_simulate(const CommonOpts& o) {
  ExperimentConfig cfg = load(o);
  ScalingParams scaling = make_scaling(cfg.K, cfg.delta_rule);
  TraitWindow win = make_window(cfg.x_min, cfg.x_max, scaling.delta_K);
  LatticeField u0 = sampled_initial(cfg, scaling, win);
  Trajectory traj;
  if (cfg.sim_space == Space::n) {
    LatticeField n0 = hopf_cole(u0, scaling, HopfCole::to_n);
    traj = simulate(n0, cfg.T, scaling, cfg.rates, cfg.kernel, cfg.integrator, cfg.output_times);
  } else {
    traj = simulate(u0, cfg.T, scaling, cfg.rates, cfg.kernel, cfg.integrator, cfg.output_times);
  }
  write_trajectory_csv(o.output_path, traj);
  double max_slope = 0.0;
  for (double s : traj.max_slopes) max_slope = std::max(max_slope, s);
  std::printf("wrote %s: %s-space run at K=%.6g, %zu nodes x %zu times, max slope %.6g, "
              "mutation tail bound %.3g\n",
              o.output_path.c_str(), to_string(traj.space).c_str(), cfg.K,
              static_cast<std::size_t>(win.size()), traj.times.size(), max_slope,
              traj.tail_bound);
  return 0;
}

int cmd_solve_hj(const CommonOpts& o) {
  ExperimentConfig cfg = load(o);
  Trajectory traj = solve_hj(cfg.initial, cfg.T, cfg.rates, cfg.kernel, cfg.hj, cfg.output_times);
  write_trajectory_csv(o.output_path, traj);
  std::printf("wrote %s: %s solution on [%.6g, %.6g], dx=%.6g, %zu times\n",
              o.output_path.c_str(), to_string(cfg.hj.scheme).c_str(), cfg.hj.x_min, cfg.hj.x_max,
              cfg.hj.dx, traj.times.size());
  return 0;
}

// Checks applicable to a stored trajectory of the given space.
bool check_applies(const std::string& id, Space space) {
  if (space == Space::n) return id == "mass_bound" || id == "positivity";
  if (space == Space::u) return id == "sandwich" || id == "lipschitz";
  return id == "lipschitz";  // limit solutions carry no scaling and no density
}

std::vector<CheckReport> verify_input(const ExperimentConfig& cfg) {
  Trajectory traj = read_trajectory_csv(cfg.input_trajectory);
  std::vector<std::string> ids;
  for (const std::string& id : cfg.checks) {
    if (check_applies(id, traj.space)) {
      ids.push_back(id);
    } else {
      std::fprintf(stderr, "warning: check '%s' does not apply to a %s-space trajectory, skipped\n",
                   id.c_str(), to_string(traj.space).c_str());
    }
  }
  if (ids.empty())
    throw std::invalid_argument("none of the requested checks applies to the input trajectory");
  CheckContext ctx;
  ctx.rates = &cfg.rates;
  ctx.kernel = &cfg.kernel;
  ctx.slack = cfg.slack;
  ctx.rel_slack = cfg.comparison_slack;
  ctx.lipschitz_cap = cfg.slope_cap;
  if (traj.space == Space::n)
    ctx.density = &traj;
  else
    ctx.rescaled = &traj;
  return run_checks(ids, ctx);
}

// Seeded battery: every scenario feeds only the runs the requested checks
// need; per check the scenario with the worst margin is reported.
std::vector<CheckReport> verify_battery(const ExperimentConfig& cfg) {
  bool want_mass = false, want_pos = false, want_comp = false, want_sand = false,
       want_lip = false;
  for (const std::string& id : cfg.checks) {
    if (id == "mass_bound") want_mass = true;
    else if (id == "positivity") want_pos = true;
    else if (id == "comparison") want_comp = true;
    else if (id == "sandwich") want_sand = true;
    else if (id == "lipschitz") want_lip = true;
  }
  ScalingParams scaling = make_scaling(cfg.K, cfg.delta_rule);
  TraitWindow win = make_window(cfg.x_min, cfg.x_max, scaling.delta_K);
  std::vector<RandomScenario> scenarios = random_scenarios(cfg.seed, cfg.n_random);

  std::map<std::string, CheckReport> worst;
  auto fold = [&worst](CheckReport rep, int scenario) {
    rep.worst_location["scenario"] = scenario;
    auto it = worst.find(rep.check_id);
    if (it == worst.end() || rep.worst_margin > it->second.worst_margin)
      worst[rep.check_id] = std::move(rep);
  };

  for (int sc = 0; sc < static_cast<int>(scenarios.size()); ++sc) {
    const RandomScenario& s = scenarios[sc];
    LatticeField u0 = sample_initial(s.initial, win);
    if (want_sand || want_lip) {
      Trajectory run =
          simulate(u0, cfg.T, scaling, s.rates, s.kernel, cfg.integrator, cfg.output_times);
      if (want_sand) fold(check_sandwich(run, s.rates, s.kernel, cfg.slack), sc);
      if (want_lip) fold(check_lipschitz(run, cfg.slope_cap), sc);
    }
    if (want_mass || want_pos) {
      LatticeField n0 = hopf_cole(u0, scaling, HopfCole::to_n);
      Trajectory run =
          simulate(n0, cfg.T, scaling, s.rates, s.kernel, cfg.integrator, cfg.output_times);
      if (want_mass) fold(check_mass_bound(run, s.rates, s.kernel, cfg.slack), sc);
      if (want_pos) fold(check_positivity(run), sc);
    }
    if (want_comp) {
      LatticeField u_up = u0;
      for (double& v : u_up.values) v += 0.3;
      IntegratorConfig fixed = cfg.integrator;
      fixed.method = Method::rk4;  // a positive step matrix preserves order
      if (fixed.dt_init <= 0.0) fixed.dt_init = 0.01;
      Trajectory lower = simulate(hopf_cole(u0, scaling, HopfCole::to_n), cfg.T, scaling, s.rates,
                                  s.kernel, fixed, cfg.output_times);
      Trajectory upper = simulate(hopf_cole(u_up, scaling, HopfCole::to_n), cfg.T, scaling,
                                  s.rates, s.kernel, fixed, cfg.output_times);
      fold(check_comparison(lower, upper, cfg.comparison_slack), sc);
    }
  }

  std::vector<CheckReport> out;
  for (const std::string& id : cfg.checks) {
    auto it = worst.find(id);
    if (it != worst.end() &&
        std::none_of(out.begin(), out.end(),
                     [&](const CheckReport& r) { return r.check_id == id; }))
      out.push_back(it->second);
  }
  return out;
}

int cmd_verify(const CommonOpts& o) {
  ExperimentConfig cfg = load(o);
  std::vector<CheckReport> reports =
      cfg.input_trajectory.empty() ? verify_battery(cfg) : verify_input(cfg);
  write_reports_json(o.output_path, reports);
  print_reports(reports);
  std::printf("wrote %s (%zu checks)\n", o.output_path.c_str(), reports.size());
  return all_passed(reports) ? 0 : 1;
}

int cmd_converge(const CommonOpts& o, const std::string& report_path) {
  ExperimentConfig cfg = load(o);
  SweepConfig sweep;
  sweep.K_list = cfg.K_list;
  sweep.delta_rule = cfg.delta_rule;
  sweep.x_min = cfg.x_min;
  sweep.x_max = cfg.x_max;
  sweep.obs_min = cfg.obs_min;
  sweep.obs_max = cfg.obs_max;
  sweep.T = cfg.T;
  sweep.output_times = cfg.output_times;
  sweep.integrator = cfg.integrator;
  sweep.reference = cfg.hj;
  sweep.timing = cfg.timing;
  SweepOutput sweep_out = run_convergence_sweep(cfg.initial, cfg.rates, cfg.kernel, sweep);
  const std::vector<ConvergenceRecord>& records = sweep_out.records;
  write_convergence_csv(o.output_path, records);
  for (const ConvergenceRecord& r : records) {
    std::string timing = cfg.timing ? std::to_string(r.runtime_seconds) + "s" : std::string();
    std::printf("K=%-10.6g h=%-10.6g sup error %-12.6g max slope %-10.6g %s\n", r.K, r.h_K,
                r.sup_error, r.max_slope, timing.c_str());
  }
  std::printf("reference consistency %.6g (two schemes on the shared grid)\n",
              sweep_out.reference_consistency);
  std::vector<CheckReport> reports{
      check_sweep_error_trend(records, cfg.sup_error_threshold, sweep_out.reference_consistency),
      check_sweep_slope_trend(records, cfg.slope_cap),
      check_reference_quality(sweep_out.reference_consistency, cfg.sup_error_threshold),
  };
  std::string rp = report_path.empty() ? o.output_path + ".checks.json" : report_path;
  write_reports_json(rp, reports);
  print_reports(reports);
  std::printf("wrote %s (%zu records) and %s\n", o.output_path.c_str(), records.size(),
              rp.c_str());
  return all_passed(reports) ? 0 : 1;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"selmut: rescaled selection-mutation lattice runs and their constrained "
               "Hamilton-Jacobi limit"};
  app.require_subcommand(1);

  CommonOpts sim_opts, hj_opts, ver_opts, con_opts;
  std::string report_path;

  CLI::App* sim = app.add_subcommand(
      "simulate-discrete", "Integrate one rescaled lattice model and store the trajectory");
  add_common(sim, sim_opts, "trajectory CSV to write");
  CLI::App* hj = app.add_subcommand(
      "solve-hj", "Solve the constrained limit equation with a monotone scheme");
  add_common(hj, hj_opts, "trajectory CSV to write");
  CLI::App* ver = app.add_subcommand(
      "verify", "Run structural checks on a seeded battery or a stored trajectory");
  add_common(ver, ver_opts, "check-report JSON to write");
  CLI::App* con = app.add_subcommand(
      "converge", "Sweep carrying capacities against the shared limit reference");
  add_common(con, con_opts, "convergence-record CSV to write");
  con->add_option("--report", report_path,
                  "trend-check JSON to write (default: <output>.checks.json)");

  try {
    app.parse(argc, argv);
  } catch (const CLI::CallForHelp& e) {
    return app.exit(e);
  } catch (const CLI::CallForAllHelp& e) {
    return app.exit(e);
  } catch (const CLI::ParseError& e) {
    app.exit(e);
    return 2;
  }

  try {
    if (sim->parsed()) {
      set_max_threads(sim_opts.threads);
      return cmd_simulate(sim_opts);
    }
    if (hj->parsed()) {
      set_max_threads(hj_opts.threads);
      return cmd_solve_hj(hj_opts);
    }
    if (ver->parsed()) {
      set_max_threads(ver_opts.threads);
      return cmd_verify(ver_opts);
    }
    set_max_threads(con_opts.threads);
    return cmd_converge(con_opts, report_path);
  } catch (const ConfigError& e) {
    std::fprintf(stderr, "%s\n", e.what());
    return 2;
  } catch (const std::invalid_argument& e) {
    std::fprintf(stderr, "error: %s\n", e.what());
    return 2;
  } catch (const std::exception& e) {
    std::fprintf(stderr, "error: %s\n", e.what());
    return 1;
  }
}
