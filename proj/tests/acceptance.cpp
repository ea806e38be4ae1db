// Acceptance battery: one PASS/FAIL line per criterion, exit 0 only if all
// pass.  Each criterion checks a quantitative property of the lattice model,
// the limit solver, or the command-line tool, against analytic oracles or
// certified budgets, under a pinned wall-clock budget.
//
// Usage: acceptance --cli <path-to-selmut-binary> --scratch <writable-dir>

#include <chrono>
#include <cmath>
#include <cstdarg>
#include <cstdio>
#include <exception>
#include <filesystem>
#include <functional>
#include <sstream>
#include <string>
#include <vector>

#include "selmut/analysis.hpp"
#include "selmut/config.hpp"
#include "selmut/dynamics.hpp"
#include "selmut/hj.hpp"
#include "selmut/io.hpp"
#include "selmut/kernel.hpp"
#include "selmut/lattice.hpp"
#include "selmut/rates.hpp"
#include "test_helpers.hpp"

using namespace selmut;

namespace {

std::string g_cli;
std::filesystem::path g_scratch;

struct Outcome {
  bool ok = true;
  std::string detail;
};

std::string fmt(const char* pattern, ...) {
  char buf[512];
  va_list args;
  va_start(args, pattern);
  std::vsnprintf(buf, sizeof buf, pattern, args);
  va_end(args);
  return std::string(buf);
}

bool run_criterion(int index, const char* label, double time_budget_s,
                   const std::function<Outcome()>& body) {
  auto tic = std::chrono::steady_clock::now();
  Outcome out;
  try {
    out = body();
  } catch (const std::exception& e) {
    out.ok = false;
    out.detail = std::string("exception: ") + e.what();
  }
  double secs = std::chrono::duration<double>(std::chrono::steady_clock::now() - tic).count();
  if (out.ok && secs > time_budget_s) {
    out.ok = false;
    out.detail = fmt("exceeded the %.0f s budget (took %.1f s); ", time_budget_s, secs) + out.detail;
  }
  std::printf("C%02d %s  %-28s %s [%.1fs]\n", index, out.ok ? "PASS" : "FAIL", label,
              out.detail.c_str(), secs);
  std::fflush(stdout);
  return out.ok;
}

RateSpec const_rates(double r, double p) {
  return RateSpec(BoundedFunction::constant(r), BoundedFunction::constant(p));
}

double max_slope_inside(const LatticeField& f, double x_lo, double x_hi) {
  double worst = 0.0;
  for (std::int64_t i = f.window.i_min; i + 1 <= f.window.i_max; ++i) {
    if (f.window.node(i) < x_lo || f.window.node(i + 1) > x_hi) continue;
    worst = std::max(worst, std::abs(f.at(i + 1) - f.at(i)) / f.window.step);
  }
  return worst;
}

// ---------------------------------------------------------------- criteria

Outcome kernel_moments() {
  KernelSpec k = KernelSpec::exponential();
  double worst_closed = 0.0, worst_quad = 0.0;
  for (double a : {-0.9, -0.5, 0.0, 0.5, 0.9}) {
    double exact = 1.0 / (1.0 - a * a);
    worst_closed = std::max(worst_closed, std::abs(exp_moment(k, a).value - exact));
    worst_quad = std::max(
        worst_quad, std::abs(exp_moment(k, a, 1e-8, MomentMethod::quadrature).value - exact));
  }
  for (double a : {0.0, 0.25, 0.5, 0.9}) {
    double exact = 1.0 / (1.0 - a);
    worst_closed = std::max(worst_closed, std::abs(abs_exp_moment(k, a).value - exact));
    worst_quad = std::max(
        worst_quad, std::abs(abs_exp_moment(k, a, 1e-8, MomentMethod::quadrature).value - exact));
  }
  Outcome out;
  out.ok = worst_closed <= 1e-10 && worst_quad <= 1e-6;
  out.detail = fmt("closed-form |err| %.2e (tol 1e-10), quadrature |err| %.2e (tol 1e-6)",
                   worst_closed, worst_quad);
  return out;
}

Outcome lattice_sums() {
  KernelSpec k = KernelSpec::exponential();
  Outcome out;
  double final_worst = 0.0;
  for (double a : {0.0, 0.5}) {
    double exact = 1.0 / (1.0 - a);
    double prev = std::numeric_limits<double>::infinity();
    double err = 0.0;
    for (int kk = 2; kk <= 10; ++kk) {
      double h = std::ldexp(1.0, -kk);
      double M = truncation_M_for(k, a, h, 1e-14);
      err = std::abs(discrete_exp_sum(k, h, a, M).value - exact);
      if (!(err < prev)) {
        out.ok = false;
        out.detail = fmt("error stopped decreasing at h=2^-%d for a=%.1f (%.3e -> %.3e)", kk, a,
                         prev, err);
        return out;
      }
      prev = err;
    }
    final_worst = std::max(final_worst, err);
  }
  out.ok = final_worst <= 1e-3;
  out.detail = fmt("strictly decreasing over h=2^-2..2^-10, final |err| %.2e (tol 1e-3)",
                   final_worst);
  return out;
}

Outcome mass_growth() {
  std::vector<RandomScenario> scens = random_scenarios(901, 20);
  ScalingParams s = make_scaling(1e3);
  TraitWindow w = make_window(-3.0, 3.0, s.delta_K);
  IntegratorConfig cfg;
  cfg.use_fft = true;
  double worst = -std::numeric_limits<double>::infinity();
  for (const RandomScenario& sc : scens) {
    LatticeField n0 = hopf_cole(sample_initial(sc.initial, w), s, HopfCole::to_n);
    Trajectory traj = simulate(n0, 0.4, s, sc.rates, sc.kernel, cfg);
    double rate = sc.rates.R.upper + sc.rates.p.upper * alpha_bound(sc.kernel, 0.0);
    double m0 = mass_norm(traj.fields.front());
    for (std::size_t j = 0; j < traj.times.size(); ++j) {
      double bound = (1.0 + std::exp(rate * traj.times[j] * s.log_K)) * m0;
      worst = std::max(worst, mass_norm(traj.fields[j]) / bound - 1.0);
    }
  }
  Outcome out;
  out.ok = worst <= 1e-9;
  out.detail = fmt("20 density runs at K=1e3, worst relative excess %.2e (tol 1e-9)", worst);
  return out;
}

Outcome order_preservation() {
  std::vector<RandomScenario> scens = random_scenarios(902, 20);
  ScalingParams s = make_scaling(1e2);
  TraitWindow w = make_window(-3.0, 3.0, s.delta_K);
  IntegratorConfig cfg;
  cfg.method = Method::rk4;
  cfg.dt_init = 0.02;
  cfg.use_fft = true;
  double worst = -std::numeric_limits<double>::infinity();
  for (const RandomScenario& sc : scens) {
    LatticeField lo0 = sample_initial(sc.initial, w);
    LatticeField hi0 = lo0;
    for (double& v : hi0.values) v += 0.3;
    Trajectory lo = simulate(lo0, 1.0, s, sc.rates, sc.kernel, cfg);
    Trajectory hi = simulate(hi0, 1.0, s, sc.rates, sc.kernel, cfg);
    CheckReport rep = check_comparison(lo, hi, 1e-12);
    worst = std::max(worst, rep.worst_margin);
    if (!rep.passed) {
      Outcome out;
      out.ok = false;
      out.detail = fmt("an ordered pair crossed: relative margin %.2e > 1e-12", rep.worst_margin);
      return out;
    }
  }
  Outcome out;
  out.detail = fmt("20 ordered pairs at K=1e2 over [0,1], worst relative margin %.2e (tol 1e-12)",
                   worst);
  return out;
}

Outcome growth_sandwich() {
  ScalingParams s = make_scaling(1e4);
  TraitWindow w = make_window(-6.0, 6.0, s.delta_K);
  LatticeField u0 = sample_initial(InitialDataSpec::cone(0.0, 0.5), w);
  IntegratorConfig cfg;
  cfg.use_fft = true;
  RateSpec rates = default_rates();
  KernelSpec k = KernelSpec::exponential();
  Trajectory traj = simulate(u0, 1.0, s, rates, k, cfg);
  CheckReport rep = check_sandwich(traj, rates, k, 1e-6);
  Outcome out;
  out.ok = rep.passed;
  out.detail = fmt("default run at K=1e4, worst one-sided excess %.2e (tol 1e-6)",
                   rep.worst_margin);
  return out;
}

Outcome uniform_slopes() {
  RateSpec rates = default_rates();
  KernelSpec k = KernelSpec::exponential();
  IntegratorConfig cfg;
  cfg.use_fft = true;
  double lo = std::numeric_limits<double>::infinity(), hi = 0.0;
  for (double K : {1e2, 1e4, 1e6, 1e8}) {
    ScalingParams s = make_scaling(K);
    TraitWindow w = make_window(-4.0, 4.0, s.delta_K);
    LatticeField u0 = sample_initial(InitialDataSpec::cone(0.0, 0.9), w);
    Trajectory traj = simulate(u0, 1.0, s, rates, k, cfg);
    double sK = 0.0;
    for (const LatticeField& f : traj.fields) sK = std::max(sK, max_slope_inside(f, -2.0, 2.0));
    lo = std::min(lo, sK);
    hi = std::max(hi, sK);
  }
  Outcome out;
  out.ok = hi <= 1.5 && hi < 2.0 * lo;
  out.detail = fmt("interior slopes on [-2,2]x[0,1] span [%.3f, %.3f]: cap 1.5, spread < 2x", lo,
                   hi);
  return out;
}

Outcome limit_convergence() {
  KernelSpec k = KernelSpec::exponential();
  RateSpec rates(BoundedFunction::rational_bump(1.0, 0.0, 1.0, 0.0),  // R(x) = 1/(1+x^2)
                 BoundedFunction::constant(1.0));
  InitialDataSpec init = InitialDataSpec::cone(0.0, 0.5);

  SweepConfig sweep;
  sweep.K_list = {1e2, 1e4, 1e6, 1e8};
  sweep.x_min = -6.0;
  sweep.x_max = 6.0;
  sweep.obs_min = -2.0;
  sweep.obs_max = 2.0;
  sweep.T = 1.0;
  sweep.integrator.use_fft = true;
  sweep.reference.dx = 0.01;
  sweep.timing = false;
  SweepOutput sweep_out = run_convergence_sweep(init, rates, k, sweep);
  const std::vector<ConvergenceRecord>& records = sweep_out.records;

  // The final-error clause is asserted up to the reference's certified
  // consistency estimate (its two-scheme disagreement on the observation
  // window at T): a finite-grid reference supports no sharper claim.  The
  // quality gate caps that estimate at 20% of the threshold so the budget
  // never dominates the asserted signal.
  const double slack = sweep_out.reference_consistency;
  if (slack > 0.2 * 0.1) {
    Outcome out;
    out.ok = false;
    out.detail = fmt("reference disqualified: two-scheme disagreement %.3g > 0.02", slack);
    return out;
  }

  std::ostringstream track;
  for (std::size_t i = 0; i < records.size(); ++i) {
    track << (i ? ", " : "") << fmt("%.3g", records[i].sup_error);
    if (i > 0 && !(records[i].sup_error < records[i - 1].sup_error)) {
      Outcome out;
      out.ok = false;
      out.detail = "sup errors not strictly decreasing: " + track.str();
      return out;
    }
  }
  if (records.back().sup_error > 0.1 + slack) {
    Outcome out;
    out.ok = false;
    out.detail = fmt("final sup error %.3g > 0.1 + reference budget %.3g (",
                     records.back().sup_error, slack) +
                 track.str() + ")";
    return out;
  }

  // Flat profiles are exact up to the certified lattice-sum defect: both the
  // lattice run and the limit solve stay spatially constant, so their gap at
  // time T is T * p * |S(h,0) - 1| up to integrator tolerances.
  RateSpec frates = const_rates(0.3, 1.0);
  InitialDataSpec flat = InitialDataSpec::flat(-0.1);
  HJGridConfig grid;
  grid.x_min = -3.0;
  grid.x_max = 3.0;
  grid.dx = 0.02;
  Trajectory ref = solve_hj(flat, 1.0, frates, k, grid);
  IntegratorConfig cfg;
  cfg.use_fft = true;
  double worst_ratio = 0.0;
  for (double K : sweep.K_list) {
    ScalingParams s = make_scaling(K);
    TraitWindow w = make_window(-3.0, 3.0, s.delta_K);
    Trajectory run = simulate(sample_initial(flat, w), 1.0, s, frates, k, cfg);
    double err = sup_error(run, ref, -2.0, 2.0);
    double budget = 1.05 * (test_helpers::exp_lattice_sum(s.h_K, 0.0) - 1.0) + 1e-6;
    worst_ratio = std::max(worst_ratio, err / budget);
    if (err > budget) {
      Outcome out;
      out.ok = false;
      out.detail = fmt("flat-profile error %.3e exceeds its budget %.3e at K=%.0e", err, budget, K);
      return out;
    }
  }
  Outcome out;
  out.detail = "sup errors " + track.str() +
               fmt(" (final <= 0.1 + reference budget %.2e); flat-profile gap <= %.2f of its "
                   "certified budget",
                   slack, worst_ratio);
  return out;
}

Outcome scheme_exactness() {
  KernelSpec k = KernelSpec::exponential();
  RateSpec rates = const_rates(0.2, 1.0);
  const double r = 0.2, p0 = 1.0;
  auto H = [&](double qq) { return r + p0 / (1.0 - qq * qq); };
  auto Hp = [&](double qq) {
    double d = 1.0 - qq * qq;
    return 2.0 * p0 * qq / (d * d);
  };

  // Linear traveling data: both schemes reproduce u = qx + (r + p0/(1-q^2))t
  // to rounding at every refinement level, so the consistency bound
  // C (dx + dt) and the halving requirement hold with room to spare.
  const double q = 0.4;
  InitialDataSpec lin;
  lin.u0 = [q](double x) { return q * x; };
  lin.L = q;
  lin.family = "user";
  double lin_growth = r + p0 / (1.0 - q * q);

  double worst_lin = 0.0;
  double worst_slope = 0.0;
  for (HJScheme sch : {HJScheme::upwind_projected, HJScheme::lf_projected}) {
    for (double dx : {0.04, 0.02}) {
      HJGridConfig grid;
      grid.x_min = -6.0;
      grid.x_max = 6.0;
      grid.dx = dx;
      grid.scheme = sch;
      Trajectory traj = solve_hj(lin, 0.25, rates, k, grid);
      for (std::size_t j = 0; j < traj.times.size(); ++j) {
        const LatticeField& f = traj.fields[j];
        worst_slope = std::max(worst_slope, traj.max_slopes[j]);
        for (std::int64_t i = f.window.i_min; i <= f.window.i_max; ++i) {
          double x = f.window.node(i);
          if (std::abs(x) > 2.0) continue;
          worst_lin = std::max(worst_lin,
                               std::abs(f.at(i) - (q * x + traj.times[j] * lin_growth)));
        }
      }
    }
  }
  if (worst_lin > 1e-10) {
    Outcome out;
    out.ok = false;
    out.detail = fmt("linear traveling solution off by %.2e (tol 1e-10)", worst_lin);
    return out;
  }

  // Smooth pre-kink solution by characteristics: with constant rates the
  // gradient rides straight rays, x(t) = x0 + t H'(u0'(x0)) with
  // u(t, x(t)) = u0(x0) + t (H(q0) - q0 H'(q0)).  tanh data keeps |u0'| <= 0.3
  // and the first ray crossing sits past t = 1.2, so at T = 0.5 the ray map
  // still increases strictly and bisection inverts it.  Unlike the kinked
  // cases below, the schemes' truncation error is genuinely first order here,
  // which makes the refinement order measurable.
  const double a = 0.3, Ts = 0.5;
  auto q0s = [&](double x0) {
    double c = std::cosh(x0);
    return -a / (c * c);
  };
  auto smooth_exact = [&](double t, double x) {
    double lo = x - 1.0, hi = x + 1.0;
    for (int it = 0; it < 200; ++it) {
      double mid = 0.5 * (lo + hi);
      (mid - t * Hp(q0s(mid)) < x ? lo : hi) = mid;
    }
    double x0 = 0.5 * (lo + hi);
    double g = q0s(x0);
    return -a * std::tanh(x0) + t * (H(g) - g * Hp(g));
  };
  InitialDataSpec smooth;
  smooth.u0 = [a](double x) { return -a * std::tanh(x); };
  smooth.L = a;
  smooth.family = "user";

  std::vector<double> dxs = {0.04, 0.02, 0.01};
  std::ostringstream track;
  double order_up = 0.0, order_lf = 0.0, fitted_C = 0.0;
  for (HJScheme sch : {HJScheme::upwind_projected, HJScheme::lf_projected}) {
    std::vector<double> errs;
    for (double dx : dxs) {
      HJGridConfig grid;
      grid.x_min = -6.0;
      grid.x_max = 6.0;
      grid.dx = dx;
      grid.scheme = sch;
      Trajectory traj = solve_hj(smooth, Ts, rates, k, grid, {0.0, Ts});
      worst_slope = std::max(worst_slope, traj.max_slopes.back());
      const LatticeField& f = traj.back();
      double err = 0.0;
      for (std::int64_t i = f.window.i_min; i <= f.window.i_max; ++i) {
        double x = f.window.node(i);
        if (std::abs(x) > 2.0) continue;
        err = std::max(err, std::abs(f.at(i) - smooth_exact(Ts, x)));
      }
      if (!errs.empty() && !(err < errs.back())) {
        Outcome out;
        out.ok = false;
        out.detail = fmt("%s smooth errors not decreasing under refinement (%.3e -> %.3e)",
                         to_string(sch).c_str(), errs.back(), err);
        return out;
      }
      errs.push_back(err);
      fitted_C = std::max(fitted_C, err / dx);
    }
    double order = observed_order(dxs, errs);
    track << fmt("%ssmooth %s err %.2e order %.2f", track.tellp() > 0 ? "; " : "",
                 to_string(sch).c_str(), errs.back(), order);
    if (sch == HJScheme::upwind_projected)
      order_up = order;
    else
      order_lf = order;
  }

  // Tent datum against the exact rarefaction solution: flanks move at H(s),
  // the fan interpolates via the convex conjugate.  The fan's Lipschitz kinks
  // cap the observable rate, so the tent gates are monotone refinement and
  // final magnitude; the measured rates are reported for the record.
  const double s = 0.5, T = 0.3;
  const double fan = Hp(s);
  auto u_exact = [&](double x) {
    double d = std::abs(x);
    if (d >= T * fan) return -s * d + T * H(s);
    double z = d / T;
    double lo = 0.0, hi = s;
    for (int it = 0; it < 200; ++it) {
      double mid = 0.5 * (lo + hi);
      (Hp(mid) < z ? lo : hi) = mid;
    }
    double qs = 0.5 * (lo + hi);
    return T * (H(qs) - qs * z);
  };

  InitialDataSpec tent = InitialDataSpec::cone(0.0, s);
  for (HJScheme sch : {HJScheme::upwind_projected, HJScheme::lf_projected}) {
    std::vector<double> errs;
    for (double dx : dxs) {
      HJGridConfig grid;
      grid.x_min = -6.0;
      grid.x_max = 6.0;
      grid.dx = dx;
      grid.scheme = sch;
      Trajectory traj = solve_hj(tent, T, rates, k, grid, {0.0, T});
      worst_slope = std::max(worst_slope, traj.max_slopes.back());
      const LatticeField& f = traj.back();
      double err = 0.0;
      for (std::int64_t i = f.window.i_min; i <= f.window.i_max; ++i) {
        double x = f.window.node(i);
        if (std::abs(x) > 2.0) continue;
        err = std::max(err, std::abs(f.at(i) - u_exact(x)));
      }
      if (!errs.empty() && !(err < errs.back())) {
        Outcome out;
        out.ok = false;
        out.detail = fmt("%s tent errors not decreasing under refinement (%.3e -> %.3e)",
                         to_string(sch).c_str(), errs.back(), err);
        return out;
      }
      errs.push_back(err);
    }
    track << fmt("; tent %s err %.2e order %.2f", to_string(sch).c_str(), errs.back(),
                 observed_order(dxs, errs));
    if (errs.back() > 0.02) {
      Outcome out;
      out.ok = false;
      out.detail = fmt("%s tent error %.3e > 0.02 at dx=0.01", to_string(sch).c_str(),
                       errs.back());
      return out;
    }
  }
  Outcome out;
  out.ok = order_up >= 0.9 && order_lf >= 0.9 && worst_slope <= 1.0 + 1e-12;
  out.detail = fmt("linear exact to %.1e; ", worst_lin) + track.str() +
               fmt("; fitted C %.2f; max slope %.12f (cap 1+1e-12)", fitted_C, worst_slope);
  if (order_up < 0.9) out.detail += " [upwind smooth order below 0.9]";
  if (order_lf < 0.9) out.detail += " [central smooth order below 0.9]";
  return out;
}

Outcome scheme_agreement() {
  KernelSpec k = KernelSpec::exponential();
  RateSpec rates = default_rates();
  InitialDataSpec init = InitialDataSpec::cone(0.0, 0.5);
  HJGridConfig grid;
  grid.x_min = -6.0;
  grid.x_max = 6.0;
  grid.dx = 0.01;

  grid.scheme = HJScheme::lf_projected;
  Trajectory lf = solve_hj(init, 1.0, rates, k, grid);
  grid.scheme = HJScheme::upwind_projected;
  Trajectory up = solve_hj(init, 1.0, rates, k, grid);

  double gap = sup_error(lf, up, -2.0, 2.0);
  double worst_slope = 0.0;
  for (const Trajectory* tr : {&lf, &up})
    for (double sl : tr->max_slopes) worst_slope = std::max(worst_slope, sl);

  Outcome out;
  out.ok = gap <= 5e-2 && worst_slope <= 1.0 + 1e-12;
  out.detail = fmt("schemes differ by %.3e on [-2,2] (tol 5e-2), max slope %.12f", gap,
                   worst_slope);
  return out;
}

Outcome time_regularisation() {
  const double c = 0.8;
  TraitWindow w = make_window(-1.0, 1.0, 0.25);
  Trajectory traj;
  traj.space = Space::hj;
  for (int j = 0; j <= 20; ++j) {
    double t = 0.05 * j;
    traj.times.push_back(t);
    traj.fields.push_back(make_field(w, Space::hj, c * t));
    traj.max_slopes.push_back(0.0);
  }
  double worst = 0.0;
  bool below = true;
  for (double gamma : {0.1, 0.5}) {
    for (double t : {0.3, 0.5, 0.7}) {
      LatticeField g = inf_convolution_time(traj, t, gamma);
      double expect = c * t - c * c * gamma * gamma / 4.0;
      for (double v : g.values) {
        worst = std::max(worst, std::abs(v - expect));
        below = below && v <= c * t + 1e-15;
      }
    }
  }
  Outcome out;
  out.ok = worst <= 1e-6 && below;
  out.detail = fmt("|u_gamma - (ct - c^2 gamma^2/4)| <= %.2e (tol 1e-6), output below input: %s",
                   worst, below ? "yes" : "no");
  return out;
}

Outcome thread_determinism() {
  struct Case {
    const char* name;
    const char* sub;
    std::string config;
  };
  std::vector<Case> cases = {
      {"verify", "verify",
       R"({"K": 100.0, "T": 0.2, "n_random": 3, "seed": 5,
           "window": {"x_min": -2.0, "x_max": 2.0},
           "observation": {"x_min": -1.0, "x_max": 1.0}})"},
      {"converge", "converge",
       R"({"K_list": [100.0, 1000.0], "T": 0.2, "sup_error_threshold": 0.5,
           "window": {"x_min": -2.0, "x_max": 2.0},
           "observation": {"x_min": -0.5, "x_max": 0.5},
           "hj": {"dx": 0.02}})"},
      {"solve_hj", "solve-hj",
       R"({"T": 0.05,
           "window": {"x_min": -6.0, "x_max": 6.0},
           "hj": {"dx": 0.003}})"},
      {"simulate", "simulate-discrete",
       R"({"K": 1e8, "T": 0.02, "space": "n",
           "window": {"x_min": -4.0, "x_max": 4.0},
           "integrator": {"use_fft": true}})"},
  };

  test_helpers::TempDir dir("acceptance_cli");
  for (const Case& c : cases) {
    std::string cfg = (g_scratch / (std::string(c.name) + ".json")).string();
    test_helpers::spit(cfg, c.config);
    std::vector<std::string> outputs;
    std::vector<std::string> reports;
    for (int threads : {1, 4, 8}) {
      std::string out =
          (g_scratch / fmt("%s_t%d%s", c.name, threads,
                           std::string(c.sub) == "verify" ? ".json" : ".csv"))
              .string();
      std::string args = std::string(c.sub) + " --threads " + std::to_string(threads) +
                         " --no-timing --config " + cfg + " --output " + out;
      test_helpers::CliResult r = test_helpers::run_cli(g_cli, args, dir);
      if (r.exit_code != 0) {
        Outcome o;
        o.ok = false;
        o.detail = fmt("%s with --threads %d exited %d: ", c.sub, threads, r.exit_code) + r.err;
        return o;
      }
      outputs.push_back(test_helpers::slurp(out));
      if (std::string(c.sub) == "converge")
        reports.push_back(test_helpers::slurp(out + ".checks.json"));
    }
    for (std::size_t i = 1; i < outputs.size(); ++i) {
      if (outputs[i] != outputs[0] || outputs[i].empty()) {
        Outcome o;
        o.ok = false;
        o.detail = fmt("%s output differs between --threads 1 and a higher count", c.sub);
        return o;
      }
    }
    for (std::size_t i = 1; i < reports.size(); ++i) {
      if (reports[i] != reports[0]) {
        Outcome o;
        o.ok = false;
        o.detail = "converge trend report differs across thread counts";
        return o;
      }
    }
  }
  Outcome out;
  out.detail = "4 subcommands x threads {1,4,8}: byte-identical outputs";
  return out;
}

}  // namespace

int main(int argc, char** argv) {
  for (int i = 1; i + 1 < argc; ++i) {
    std::string a = argv[i];
    if (a == "--cli") g_cli = argv[++i];
    if (a == "--scratch") g_scratch = argv[++i];
  }
  if (g_cli.empty() || g_scratch.empty()) {
    std::fprintf(stderr, "usage: acceptance --cli <selmut binary> --scratch <dir>\n");
    return 2;
  }
  std::error_code ec;
  std::filesystem::remove_all(g_scratch, ec);
  std::filesystem::create_directories(g_scratch);

  int passed = 0, total = 0;
  auto tally = [&](bool ok) {
    ++total;
    if (ok) ++passed;
  };
  tally(run_criterion(1, "kernel moments", 1.0, kernel_moments));
  tally(run_criterion(2, "lattice sums", 1.0, lattice_sums));
  tally(run_criterion(3, "mass growth", 30.0, mass_growth));
  tally(run_criterion(4, "order preservation", 30.0, order_preservation));
  tally(run_criterion(5, "growth sandwich", 10.0, growth_sandwich));
  tally(run_criterion(6, "uniform slopes", 600.0, uniform_slopes));
  tally(run_criterion(7, "limit convergence", 600.0, limit_convergence));
  tally(run_criterion(8, "scheme exactness + order", 60.0, scheme_exactness));
  tally(run_criterion(9, "scheme agreement", 120.0, scheme_agreement));
  tally(run_criterion(10, "time regularisation", 1.0, time_regularisation));
  tally(run_criterion(11, "thread determinism", 600.0, thread_determinism));

  std::printf("acceptance: %d/%d criteria passed\n", passed, total);
  return passed == total ? 0 : 1;
}
