#include "selmut/analysis.hpp"

#include <algorithm>
#include <chrono>
#include <cmath>
#include <cstdint>
#include <limits>
#include <set>
#include <sstream>
#include <stdexcept>

#include "selmut/errors.hpp"

namespace selmut {
namespace {

constexpr double kInf = std::numeric_limits<double>::infinity();

void require(bool ok, const std::string& msg) {
  if (!ok) throw std::invalid_argument(msg);
}

bool same_window(const TraitWindow& a, const TraitWindow& b) {
  return a.i_min == b.i_min && a.i_max == b.i_max &&
         std::abs(a.step - b.step) <= 1e-12 * std::max(a.step, b.step);
}

}  // namespace

double sup_error(const Trajectory& a, const Trajectory& b, double x_lo, double x_hi,
                 std::vector<double> times) {
  require(!a.fields.empty() && !b.fields.empty(), "sup_error needs non-empty trajectories");
  const TraitWindow& wa = a.fields.front().window;
  const TraitWindow& wb = b.fields.front().window;
  double lo = std::max({x_lo, wa.lo(), wb.lo()});
  double hi = std::min({x_hi, wa.hi(), wb.hi()});
  require(lo <= hi, "the requested interval does not meet the overlap of the two windows");
  if (times.empty()) {
    for (double t : a.times)
      if (t >= b.times.front() - 1e-12 && t <= b.times.back() + 1e-12)
        times.push_back(std::clamp(t, b.times.front(), b.times.back()));
    require(!times.empty(), "the trajectories share no time range");
  }
  // Union of both node sets inside [lo, hi]: the difference of two piecewise
  // linear functions attains its sup at a breakpoint or interval end.
  std::vector<double> xs{lo, hi};
  for (const TraitWindow* w : {&wa, &wb}) {
    std::int64_t i0 = static_cast<std::int64_t>(std::ceil(lo / w->step - 1e-9));
    std::int64_t i1 = static_cast<std::int64_t>(std::floor(hi / w->step + 1e-9));
    for (std::int64_t i = std::max(i0, w->i_min); i <= std::min(i1, w->i_max); ++i)
      xs.push_back(w->node(i));
  }
  std::sort(xs.begin(), xs.end());
  xs.erase(std::unique(xs.begin(), xs.end()), xs.end());

  double worst = 0.0;
  for (double t : times) {
    LatticeField fa = field_at_time(a, t);
    LatticeField fb = field_at_time(b, t);
    for (double x : xs)
      worst = std::max(worst, std::abs(interpolate(fa, x) - interpolate(fb, x)));
  }
  return worst;
}

CheckReport check_mass_bound(const Trajectory& n_traj, const RateSpec& rates,
                             const KernelSpec& kernel, double slack) {
  require(n_traj.space == Space::n, "mass_bound applies to density trajectories");
  require(n_traj.scaling.has_value(), "mass_bound needs the run's scaling");
  require(!n_traj.fields.empty(), "mass_bound needs stored fields");
  CheckReport rep;
  rep.check_id = "mass_bound";
  rep.tolerance = slack;
  const double log_K = n_traj.scaling->log_K;
  const double rate = rates.R.upper + rates.p.upper * alpha_bound(kernel, 0.0);
  const double mass0 = mass_norm(n_traj.fields.front());
  rep.worst_margin = -kInf;
  for (std::size_t k = 0; k < n_traj.times.size(); ++k) {
    double t = n_traj.times[k];
    double mass = mass_norm(n_traj.fields[k]);
    double margin;
    if (mass0 > 0.0) {
      double bound = mass0 * std::exp(rate * t * log_K);
      margin = mass / bound - 1.0;
    } else {
      margin = mass;  // nothing can grow out of an empty population
    }
    if (margin > rep.worst_margin) {
      rep.worst_margin = margin;
      rep.worst_location = {{"time", t}};
    }
  }
  rep.passed = rep.worst_margin <= rep.tolerance;
  return rep;
}

CheckReport check_positivity(const Trajectory& n_traj, double slack) {
  require(n_traj.space == Space::n, "positivity applies to density trajectories");
  require(!n_traj.fields.empty(), "positivity needs stored fields");
  CheckReport rep;
  rep.check_id = "positivity";
  rep.tolerance = slack;
  rep.worst_margin = -kInf;
  for (std::size_t k = 0; k < n_traj.times.size(); ++k) {
    const LatticeField& f = n_traj.fields[k];
    double scale = 1.0;
    for (double v : f.values) scale = std::max(scale, std::abs(v));
    for (std::int64_t i = f.window.i_min; i <= f.window.i_max; ++i) {
      double margin = -f.at(i) / scale;
      if (margin > rep.worst_margin) {
        rep.worst_margin = margin;
        rep.worst_location = {{"time", n_traj.times[k]}, {"trait", f.window.node(i)}};
      }
    }
  }
  rep.passed = rep.worst_margin <= rep.tolerance;
  return rep;
}

CheckReport check_comparison(const Trajectory& lower, const Trajectory& upper,
                             double rel_slack) {
  require(lower.times.size() == upper.times.size(),
          "comparison needs trajectories with the same output times");
  require(!lower.fields.empty(), "comparison needs stored fields");
  require(same_window(lower.fields.front().window, upper.fields.front().window),
          "comparison needs trajectories on the same window");
  CheckReport rep;
  rep.check_id = "comparison";
  rep.tolerance = rel_slack;
  rep.worst_margin = -kInf;
  for (std::size_t k = 0; k < lower.times.size(); ++k) {
    require(std::abs(lower.times[k] - upper.times[k]) <=
                1e-12 * std::max(1.0, std::abs(upper.times[k])),
            "comparison needs trajectories with the same output times");
    const LatticeField& fl = lower.fields[k];
    const LatticeField& fu = upper.fields[k];
    for (std::int64_t i = fl.window.i_min; i <= fl.window.i_max; ++i) {
      double nl = fl.at(i), nu = fu.at(i);
      double margin = (nl - nu) / std::max({1.0, std::abs(nl), std::abs(nu)});
      if (margin > rep.worst_margin) {
        rep.worst_margin = margin;
        rep.worst_location = {{"time", lower.times[k]}, {"trait", fl.window.node(i)}};
      }
    }
  }
  rep.passed = rep.worst_margin <= rep.tolerance;
  return rep;
}

CheckReport check_sandwich(const Trajectory& u_traj, const RateSpec& rates,
                           const KernelSpec& kernel, double slack) {
  require(u_traj.space == Space::u, "sandwich applies to rescaled trajectories");
  require(!u_traj.fields.empty(), "sandwich needs stored fields");
  CheckReport rep;
  rep.check_id = "sandwich";
  rep.tolerance = slack;
  double L = 0.0;
  for (double s : u_traj.max_slopes) L = std::max(L, s);
  if (L >= 1.0) {
    // the upper certificate is built on a sub-unit slope; report the breach
    rep.worst_margin = kInf;
    rep.worst_location = {{"slope", L}};
    rep.passed = false;
    return rep;
  }
  const double up_rate = rates.R.upper + rates.p.upper * alpha_bound(kernel, L);
  const double lo_rate = rates.R.lower;
  const LatticeField& f0 = u_traj.fields.front();
  rep.worst_margin = -kInf;
  for (std::size_t k = 0; k < u_traj.times.size(); ++k) {
    double t = u_traj.times[k];
    const LatticeField& f = u_traj.fields[k];
    for (std::int64_t i = f.window.i_min; i <= f.window.i_max; ++i) {
      double above = f.at(i) - (f0.at(i) + t * up_rate);
      double below = (f0.at(i) + t * lo_rate) - f.at(i);
      double margin = std::max(above, below);
      if (margin > rep.worst_margin) {
        rep.worst_margin = margin;
        rep.worst_location = {{"time", t},
                              {"trait", f.window.node(i)},
                              {"side", above >= below ? 1.0 : -1.0}};
      }
    }
  }
  rep.passed = rep.worst_margin <= rep.tolerance;
  return rep;
}

CheckReport check_lipschitz(const Trajectory& traj, double cap) {
  require(!traj.max_slopes.empty(), "lipschitz needs recorded slopes");
  CheckReport rep;
  rep.check_id = "lipschitz";
  rep.tolerance = 0.0;
  rep.worst_margin = -kInf;
  for (std::size_t k = 0; k < traj.max_slopes.size(); ++k) {
    double margin = traj.max_slopes[k] - cap;
    if (margin > rep.worst_margin) {
      rep.worst_margin = margin;
      rep.worst_location = {{"time", traj.times[k]}, {"cap", cap}};
    }
  }
  rep.passed = rep.worst_margin <= rep.tolerance;
  return rep;
}

std::vector<CheckReport> run_checks(const std::vector<std::string>& ids,
                                    const CheckContext& ctx) {
  std::vector<CheckReport> out;
  for (const std::string& id : ids) {
    if (id == "mass_bound") {
      require(ctx.density && ctx.rates && ctx.kernel,
              "check 'mass_bound' needs a density trajectory, rates and a kernel");
      out.push_back(check_mass_bound(*ctx.density, *ctx.rates, *ctx.kernel, ctx.slack));
    } else if (id == "positivity") {
      require(ctx.density != nullptr, "check 'positivity' needs a density trajectory");
      out.push_back(check_positivity(*ctx.density, ctx.rel_slack));
    } else if (id == "comparison") {
      require(ctx.pair_lower && ctx.pair_upper,
              "check 'comparison' needs an ordered pair of trajectories");
      out.push_back(check_comparison(*ctx.pair_lower, *ctx.pair_upper, ctx.rel_slack));
    } else if (id == "sandwich") {
      require(ctx.rescaled && ctx.rates && ctx.kernel,
              "check 'sandwich' needs a rescaled trajectory, rates and a kernel");
      out.push_back(check_sandwich(*ctx.rescaled, *ctx.rates, *ctx.kernel, ctx.slack));
    } else if (id == "lipschitz") {
      require(ctx.rescaled != nullptr, "check 'lipschitz' needs a rescaled trajectory");
      out.push_back(check_lipschitz(*ctx.rescaled, ctx.lipschitz_cap));
    } else {
      throw std::invalid_argument(
          "unknown check '" + id +
          "'; known checks: mass_bound, positivity, comparison, sandwich, lipschitz");
    }
  }
  return out;
}

SweepOutput run_convergence_sweep(const InitialDataSpec& init, const RateSpec& rates,
                                  const KernelSpec& kernel, const SweepConfig& sweep) {
  require(!sweep.K_list.empty(), "the sweep needs at least one carrying capacity");
  require(sweep.obs_min < sweep.obs_max, "the observation interval is empty");
  require(sweep.x_min <= sweep.obs_min && sweep.obs_max <= sweep.x_max,
          "the observation interval must lie inside the simulation window");

  HJGridConfig ref_grid = sweep.reference;
  ref_grid.x_min = sweep.x_min;
  ref_grid.x_max = sweep.x_max;
  Trajectory reference = solve_hj(init, sweep.T, rates, kernel, ref_grid, sweep.output_times);

  // Certify the reference: solve the companion scheme once on the same grid
  // and record the disagreement where the records are measured.  This is the
  // empirical consistency estimate that budgets the final-error check.
  HJGridConfig cross_grid = ref_grid;
  cross_grid.scheme = ref_grid.scheme == HJScheme::lf_projected ? HJScheme::upwind_projected
                                                                : HJScheme::lf_projected;
  Trajectory cross = solve_hj(init, sweep.T, rates, kernel, cross_grid, sweep.output_times);

  SweepOutput out;
  out.reference_consistency =
      sup_error(reference, cross, sweep.obs_min, sweep.obs_max, {sweep.T});

  out.records.reserve(sweep.K_list.size());
  for (double K : sweep.K_list) {
    ScalingParams scaling = make_scaling(K, sweep.delta_rule);
    TraitWindow win = make_window(sweep.x_min, sweep.x_max, scaling.delta_K);
    LatticeField u0 = sample_initial(init, win);
    auto tic = std::chrono::steady_clock::now();
    Trajectory run =
        simulate(u0, sweep.T, scaling, rates, kernel, sweep.integrator, sweep.output_times);
    auto toc = std::chrono::steady_clock::now();
    ConvergenceRecord rec;
    rec.K = K;
    rec.log_K = scaling.log_K;
    rec.delta_K = scaling.delta_K;
    rec.h_K = scaling.h_K;
    rec.sup_error = sup_error(run, reference, sweep.obs_min, sweep.obs_max, {sweep.T});
    rec.max_slope = run.max_slopes.back();
    rec.runtime_seconds =
        sweep.timing ? std::chrono::duration<double>(toc - tic).count() : 0.0;
    out.records.push_back(rec);
  }
  out.reference = std::move(reference);
  return out;
}

std::vector<ConvergenceRecord> convergence_sweep(const InitialDataSpec& init,
                                                 const RateSpec& rates, const KernelSpec& kernel,
                                                 const SweepConfig& sweep,
                                                 Trajectory* reference_out) {
  SweepOutput out = run_convergence_sweep(init, rates, kernel, sweep);
  if (reference_out) *reference_out = std::move(out.reference);
  return std::move(out.records);
}

CheckReport check_sweep_error_trend(const std::vector<ConvergenceRecord>& records,
                                    double final_threshold, double reference_slack) {
  require(!records.empty(), "the sweep produced no records");
  require(reference_slack >= 0.0, "the reference consistency budget cannot be negative");
  CheckReport rep;
  rep.check_id = "sweep_error_trend";
  rep.tolerance = 0.0;
  rep.worst_margin = records.back().sup_error - (final_threshold + reference_slack);
  rep.worst_location = {{"K", records.back().K},
                        {"threshold", final_threshold},
                        {"reference_slack", reference_slack}};
  for (std::size_t k = 1; k < records.size(); ++k) {
    double margin = records[k].sup_error - records[k - 1].sup_error;
    if (margin > rep.worst_margin) {
      rep.worst_margin = margin;
      rep.worst_location = {{"K", records[k].K},
                            {"threshold", final_threshold},
                            {"reference_slack", reference_slack}};
    }
  }
  rep.passed = rep.worst_margin <= rep.tolerance;
  return rep;
}

CheckReport check_reference_quality(double reference_consistency, double final_threshold) {
  require(reference_consistency >= 0.0, "the consistency estimate cannot be negative");
  CheckReport rep;
  rep.check_id = "reference_quality";
  rep.tolerance = 0.0;
  double budget = 0.2 * final_threshold;
  rep.worst_margin = reference_consistency - budget;
  rep.worst_location = {{"reference_consistency", reference_consistency}, {"budget", budget}};
  rep.passed = rep.worst_margin <= rep.tolerance;
  return rep;
}

CheckReport check_sweep_slope_trend(const std::vector<ConvergenceRecord>& records, double cap) {
  require(!records.empty(), "the sweep produced no records");
  CheckReport rep;
  rep.check_id = "sweep_slope_trend";
  rep.tolerance = 0.0;
  rep.worst_margin = -kInf;
  for (const ConvergenceRecord& rec : records) {
    double margin = rec.max_slope - cap;
    if (margin > rep.worst_margin) {
      rep.worst_margin = margin;
      rep.worst_location = {{"K", rec.K}, {"cap", cap}};
    }
  }
  rep.passed = rep.worst_margin <= rep.tolerance;
  return rep;
}

double observed_order(const std::vector<double>& hs, const std::vector<double>& errs) {
  require(hs.size() == errs.size() && hs.size() >= 2,
          "observed_order needs at least two matching samples");
  double mx = 0.0, my = 0.0;
  const double n = static_cast<double>(hs.size());
  std::vector<double> lx(hs.size()), ly(hs.size());
  for (std::size_t i = 0; i < hs.size(); ++i) {
    require(hs[i] > 0.0 && errs[i] > 0.0, "observed_order needs positive samples");
    lx[i] = std::log(hs[i]);
    ly[i] = std::log(errs[i]);
    mx += lx[i];
    my += ly[i];
  }
  mx /= n;
  my /= n;
  double num = 0.0, den = 0.0;
  for (std::size_t i = 0; i < hs.size(); ++i) {
    num += (lx[i] - mx) * (ly[i] - my);
    den += (lx[i] - mx) * (lx[i] - mx);
  }
  require(den > 0.0, "observed_order needs at least two distinct resolutions");
  return num / den;
}

}  // namespace selmut
