#pragma once

#include <stdexcept>
#include <string>
#include <vector>

#include "selmut/dynamics.hpp"
#include "selmut/hj.hpp"
#include "selmut/kernel.hpp"
#include "selmut/lattice.hpp"
#include "selmut/rates.hpp"

namespace selmut {

// Raised when a configuration cannot be used; `issues` lists every problem
// found, not only the first one.
struct ConfigError : std::runtime_error {
  std::vector<std::string> issues;
  explicit ConfigError(std::vector<std::string> issues_);
};

// R: unit rational bump 1/(1+x^2) (favours the centre of the window);
// p: unit constant mutation rate.
RateSpec default_rates();

// Full description of an experiment; every field has a working default, a
// JSON config overrides selectively.
struct ExperimentConfig {
  KernelSpec kernel = KernelSpec::exponential();
  RateSpec rates = default_rates();
  InitialDataSpec initial = InitialDataSpec::cone(0.0, 0.5);
  std::vector<double> K_list{1e2, 1e4, 1e6, 1e8};
  double K = 1e4;  // single-run commands
  DeltaRule delta_rule = DeltaRule::power_law();
  double x_min = -6.0, x_max = 6.0;      // simulation window
  double obs_min = -2.0, obs_max = 2.0;  // observation interval
  double T = 1.0;
  std::vector<double> output_times;  // empty: {0, T/4, T/2, 3T/4, T}
  IntegratorConfig integrator;
  HJGridConfig hj;
  std::vector<std::string> checks{"mass_bound", "positivity", "comparison", "sandwich",
                                  "lipschitz"};
  int n_random = 20;
  double comparison_slack = 1e-12;
  double slack = 1e-6;
  double sup_error_threshold = 0.1;
  double slope_cap = 1.5;
  unsigned seed = 42;
  Space sim_space = Space::u;
  bool timing = true;
  std::string input_trajectory;  // verify: check a stored run instead
};

struct ParsedConfig {
  ExperimentConfig config;
  std::vector<std::string> warnings;
};

// Parses a JSON experiment description.  All problems are collected before
// ConfigError is raised with the complete list.  With strict = true unknown
// keys are errors, otherwise warnings.
ParsedConfig parse_config(const std::string& json_text, bool strict = false);
ParsedConfig load_config(const std::string& path, bool strict = false);

struct RandomScenario {
  KernelSpec kernel;
  RateSpec rates;
  InitialDataSpec initial;
};

// Deterministic scenario battery for the randomised checks: bounded bump or
// sine rates, a strictly positive mutation rate, mixed cone-family initial
// data.  The fixed generator (mt19937) and draw order make the battery a
// pure function of (seed, count).
std::vector<RandomScenario> random_scenarios(unsigned seed, int count);

}  // namespace selmut
