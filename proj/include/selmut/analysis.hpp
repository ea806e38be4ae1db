#pragma once

#include <string>
#include <vector>

#include "selmut/check_report.hpp"
#include "selmut/dynamics.hpp"
#include "selmut/hj.hpp"
#include "selmut/kernel.hpp"
#include "selmut/lattice.hpp"
#include "selmut/rates.hpp"

namespace selmut {

// Largest |a - b| over the trait interval [x_lo, x_hi] intersected with both
// windows, sampled at the union of both node sets (exact for the piecewise
// linear interpolants) and at the given times (linear interpolation between
// stored outputs).  Empty `times` selects the times stored in `a` that both
// trajectories cover.  Space tags are ignored: values are compared as-is.
double sup_error(const Trajectory& a, const Trajectory& b, double x_lo, double x_hi,
                 std::vector<double> times = {});

// Every check reports the same way: `worst_margin` is the largest value of
// the check's violation functional (negative or small when healthy), the
// check passes iff worst_margin <= tolerance, and `worst_location` points at
// the argmax.

// Density growth: mass(t) <= mass(0) * exp((R_max + p_max * alpha0) t log K)
// with alpha0 the certified kernel-sum bound at zero slope.  Violation:
// mass(t) / bound(t) - 1.
CheckReport check_mass_bound(const Trajectory& n_traj, const RateSpec& rates,
                             const KernelSpec& kernel, double slack = 1e-6);

// Densities stay nonnegative.  Violation: (-n_i) / max(1, |n(t)|_inf).
CheckReport check_positivity(const Trajectory& n_traj, double slack = 1e-9);

// Order preservation for a pair started from ordered data (lower <= upper
// node-wise).  Violation: (lower_i - upper_i) / max(1, |lower_i|, |upper_i|).
CheckReport check_comparison(const Trajectory& lower, const Trajectory& upper,
                             double rel_slack = 1e-12);

// Two-sided growth bound for a rescaled run:
//   u0 + t R_min <= u(t) <= u0 + t (R_max + p_max * alpha(L)),
// L being the largest recorded slope.  Violation: the larger one-sided
// excess, in u units.
CheckReport check_sandwich(const Trajectory& u_traj, const RateSpec& rates,
                           const KernelSpec& kernel, double slack = 1e-6);

// Recorded slopes stay below the cap.  Violation: max slope - cap.
CheckReport check_lipschitz(const Trajectory& traj, double cap);

// Everything the named checks may need; each check validates that its own
// inputs are present.
struct CheckContext {
  const RateSpec* rates = nullptr;
  const KernelSpec* kernel = nullptr;
  const Trajectory* density = nullptr;     // mass_bound, positivity
  const Trajectory* rescaled = nullptr;    // sandwich, lipschitz
  const Trajectory* pair_lower = nullptr;  // comparison
  const Trajectory* pair_upper = nullptr;
  double slack = 1e-6;
  double rel_slack = 1e-12;
  double lipschitz_cap = 1.5;
};

// Runs the checks named in `ids` (known: mass_bound, positivity, comparison,
// sandwich, lipschitz).  Unknown names raise std::invalid_argument listing
// the known set.
std::vector<CheckReport> run_checks(const std::vector<std::string>& ids,
                                    const CheckContext& ctx);

struct ConvergenceRecord {
  double K = 0.0;
  double log_K = 0.0;
  double delta_K = 0.0;
  double h_K = 0.0;
  double sup_error = 0.0;        // against the shared limit reference, at time T
  double max_slope = 0.0;        // discrete slope of the run's final field
  double runtime_seconds = 0.0;  // wall time of the lattice solve (0 if untimed)
};

struct SweepConfig {
  std::vector<double> K_list;
  DeltaRule delta_rule = DeltaRule::power_law();
  double x_min = -6.0, x_max = 6.0;      // simulation window
  double obs_min = -2.0, obs_max = 2.0;  // comparison window
  double T = 1.0;
  std::vector<double> output_times;  // empty: the five-point default
  IntegratorConfig integrator;
  HJGridConfig reference;  // grid of the shared limit reference
  bool timing = true;
};

// Everything a sweep produces: the per-K records, the shared limit reference,
// and the reference's certified consistency estimate -- the disagreement of
// the two schemes on the observation window at time T, solved once on the
// same grid.  The estimate feeds the tolerance budget of the final-error
// check and the reference quality gate.
struct SweepOutput {
  std::vector<ConvergenceRecord> records;
  Trajectory reference;
  double reference_consistency = 0.0;
};

// One rescaled lattice run per K against a single limit-equation reference
// solved once on `sweep.reference`: records the sup error over the
// observation window at time T, the slope of the final field and the wall
// time of each lattice solve.
SweepOutput run_convergence_sweep(const InitialDataSpec& init, const RateSpec& rates,
                                  const KernelSpec& kernel, const SweepConfig& sweep);

// Record-only wrapper around run_convergence_sweep; `reference_out`, when
// given, receives the shared reference.
std::vector<ConvergenceRecord> convergence_sweep(const InitialDataSpec& init,
                                                 const RateSpec& rates, const KernelSpec& kernel,
                                                 const SweepConfig& sweep,
                                                 Trajectory* reference_out = nullptr);

// Sweep trends: errors must decrease strictly along the K list and finish
// below the threshold plus `reference_slack`, the reference's certified
// consistency estimate (a gap measured against an imperfect reference can
// only be asserted up to the reference's own error budget).  Violation: the
// larger of max consecutive increase and the final excess.
CheckReport check_sweep_error_trend(const std::vector<ConvergenceRecord>& records,
                                    double final_threshold, double reference_slack = 0.0);

// The shared reference earns its role only when its two-scheme disagreement
// stays below 20% of the error scale the sweep asserts, so scheme error is
// never mistaken for model error.  Violation: consistency - 0.2 * threshold.
CheckReport check_reference_quality(double reference_consistency, double final_threshold);

// Slopes along the sweep stay below the cap.  Violation: max slope - cap.
CheckReport check_sweep_slope_trend(const std::vector<ConvergenceRecord>& records, double cap);

// Least-squares slope of log(err) against log(h): the observed order of a
// refinement study.
double observed_order(const std::vector<double>& hs, const std::vector<double>& errs);

}  // namespace selmut
