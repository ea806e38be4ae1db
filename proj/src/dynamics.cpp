#include "selmut/dynamics.hpp"

#include <fftw3.h>

#include <algorithm>
#include <cmath>
#include <complex>
#include <cstddef>
#include <cstdint>
#include <limits>
#include <sstream>
#include <stdexcept>
#include <string>
#include <utility>
#include <vector>

#include "selmut/errors.hpp"
#include "selmut/parallel.hpp"

namespace selmut {
namespace {

constexpr double kInf = std::numeric_limits<double>::infinity();
constexpr double kNaN = std::numeric_limits<double>::quiet_NaN();

// exp() arguments stay below this bound: it leaves overflow headroom
// (exp caps near 709) and guarantees that any factor lost to underflow
// (exp bottoms out near -745) contributes less than e^{690-745} ~ 1e-24
// after the back-shift, far below any tail tolerance in use.
constexpr double kExpGuard = 690.0;

// Neumaier-compensated accumulator.
struct Accum {
  double sum = 0.0, comp = 0.0;
  void add(double x) {
    double t = sum + x;
    if (std::abs(sum) >= std::abs(x))
      comp += (sum - t) + x;
    else
      comp += (x - t) + sum;
    sum = t;
  }
  double value() const { return sum + comp; }
};

double vec_max(const std::vector<double>& v) {
  double m = -kInf;
  for (double x : v) m = std::max(m, x);
  return m;
}

double vec_min(const std::vector<double>& v) {
  double m = kInf;
  for (double x : v) m = std::min(m, x);
  return m;
}

double vec_max_abs(const std::vector<double>& v) {
  double m = 0.0;
  for (double x : v) m = std::max(m, std::abs(x));
  return m;
}

double slope_of(const std::vector<double>& v, double step) {
  double m = 0.0;
  for (std::size_t i = 1; i < v.size(); ++i) m = std::max(m, std::abs(v[i] - v[i - 1]));
  return m / step;
}

bool all_finite(const std::vector<double>& v) {
  for (double x : v)
    if (!std::isfinite(x)) return false;
  return true;
}

// Truncation plan for the mutation sum: neighbour half-width `pad`, the
// kernel row and mutation-rate samples on the padded index range, the
// certified bound on the dropped terms, and the slope/range budgets the
// bound stays valid for (integration re-plans when a budget is exceeded).
struct MutationPlan {
  std::int64_t pad = 0;
  double M_eff = 0.0;     // pad * h, the realised half-width in h units
  double tail = 0.0;      // u-space: absolute bound on the neglected rhs terms
  double tail_rel = 0.0;  // n-space: kernel-side bound per unit p_max * |n|_inf
  double slope_budget = kInf;
  double gamma_budget = kInf;
  double drift_budget = kInf;
  std::vector<double> w;      // h * G(l h), index l + pad, l = -pad..pad
  std::vector<double> p_pad;  // p((i_min - pad + j) delta), j = 0..N+2pad-1
};

// Slope / log-range state of a u-space field, the quantities the truncation
// certificates depend on.
struct Measure {
  double slope = 0.0;  // max |u_{i+1} - u_i| / delta
  double gamma = 0.0;  // log K * (sup - inf), extension anchors included
  double drift = 0.0;  // frozen boundary: excess of the anchors over the edges
};

struct Workspace {
  ScalingParams scal;
  TraitWindow win;
  Space space = Space::u;
  const RateSpec* rates = nullptr;
  const KernelSpec* kernel = nullptr;
  IntegratorConfig cfg;
  std::size_t N = 0;
  double delta = 0.0, h = 0.0, logK = 0.0, p_bar = 0.0, f_bar = 0.0;
  double s_b = 0.0;     // off-window cone slope
  bool frozen = false;  // anchors held at the initial edges
  double anchorL0 = 0.0, anchorR0 = 0.0;
  MutationPlan plan;
  double tail_run = 0.0;  // running max of the certified neglected-term bound
  std::vector<double> Rv;  // R at the window nodes
  std::vector<double> q;   // padded scratch (shifted exponentials / densities)
};

Measure measure_field(const Workspace& ws, const std::vector<double>& y) {
  Measure m;
  m.slope = slope_of(y, ws.delta);
  double top = vec_max(y);
  double bot = vec_min(y);
  if (ws.frozen) {
    m.drift = std::max({0.0, ws.anchorL0 - y.front(), ws.anchorR0 - y.back()});
    top = std::max({top, ws.anchorL0, ws.anchorR0});
  }
  m.gamma = ws.logK * (top - bot);
  return m;
}

// Certified bound on the dropped u-space terms for half-width M_eff, given a
// slope bound `sp`, a log-range bound `gp` and a frozen-anchor excess `dp`.
// Two independent certificates, the smaller applies:
//   slope route:  every exponent is at most log K * dp + sp * |l h|
//                 (telescoping inside the window, outward decay beyond it),
//                 so the tail is p_max e^{log K dp} 2 f_max (1+h)
//                 e^{-(1-sp)(M-h)} / (1-sp)   [needs sp < 1];
//   range route:  every exponent is at most gp, so the tail is
//                 p_max e^{gp} 2 f_max (1+h) e^{-(M-h)}.
double tail_bound_u(const Workspace& ws, double M_eff, double sp, double gp, double dp) {
  const double C = 2.0 * ws.f_bar * (1.0 + ws.h);
  double tail_slope = kInf;
  if (sp < 0.999) {
    double om = 1.0 - sp;
    tail_slope = ws.p_bar * C * std::exp(ws.logK * dp - om * (M_eff - ws.h)) / om;
  }
  double tail_range = ws.p_bar * C * std::exp(gp - (M_eff - ws.h));
  return std::min(tail_slope, tail_range);
}

void fill_plan_arrays(Workspace& ws, MutationPlan& p) {
  const std::int64_t pad = p.pad;
  p.w.assign(static_cast<std::size_t>(2 * pad + 1), 0.0);
  for (std::int64_t l = -pad; l <= pad; ++l)
    p.w[static_cast<std::size_t>(l + pad)] = ws.h * ws.kernel->density(static_cast<double>(l) * ws.h);
  p.p_pad.assign(ws.N + static_cast<std::size_t>(2 * pad), 0.0);
  for (std::size_t j = 0; j < p.p_pad.size(); ++j) {
    std::int64_t i = ws.win.i_min - pad + static_cast<std::int64_t>(j);
    p.p_pad[j] = ws.rates->p(static_cast<double>(i) * ws.delta);
  }
}

void build_plan(Workspace& ws, const Measure& m) {
  MutationPlan p;
  if (!ws.cfg.mutation_enabled) {
    ws.plan = std::move(p);  // pad 0, tail 0: the term itself is removed
    return;
  }
  const double h = ws.h;
  const double tau = ws.cfg.tail_tol;
  const double C = 2.0 * ws.f_bar * (1.0 + h);
  double M_slope = kInf, M_range = kInf;
  double dp = 0.0;
  if (ws.space == Space::u) {
    if (m.slope <= 0.96) {
      p.slope_budget = m.slope + 0.02;
      if (ws.frozen) {
        p.drift_budget = m.drift + 0.5;
        dp = p.drift_budget;
      }
      double om = 1.0 - p.slope_budget;
      M_slope = h + (std::log(C / (om * tau)) + ws.logK * dp) / om;
    }
    p.gamma_budget = m.gamma + 1.0;
    M_range = h + p.gamma_budget + std::log(C / tau);
  } else {
    // densities carry no exponential factor: plain kernel tail
    M_range = h + std::log(C / tau);
  }
  double M = std::min(M_slope, M_range);
  if (ws.cfg.truncation_M > 0.0) {
    M = ws.cfg.truncation_M;
    p.slope_budget = p.gamma_budget = p.drift_budget = kInf;  // user-fixed: never re-plan
  }
  double pad_d = std::ceil(M / h - 1e-12);
  if (!(pad_d >= 0.0) || pad_d > 1e7) {
    std::ostringstream os;
    os << "mutation truncation needs " << pad_d << " lattice neighbours per side; "
       << "the field range is incompatible with this window/tolerance";
    throw IntegrationError(os.str());
  }
  p.pad = std::max<std::int64_t>(0, static_cast<std::int64_t>(pad_d));
  p.M_eff = static_cast<double>(p.pad) * h;
  if (ws.space == Space::u) {
    double sp = std::min(p.slope_budget, kInf);
    double gp = std::min(p.gamma_budget, m.gamma + 1.0);
    if (ws.cfg.truncation_M > 0.0) {  // report for the measured state instead
      sp = m.slope;
      gp = m.gamma;
      dp = m.drift;
    }
    p.tail = tail_bound_u(ws, p.M_eff, sp, gp, dp);
  }
  p.tail_rel = C * std::exp(-(p.M_eff - h));
  fill_plan_arrays(ws, p);
  ws.plan = std::move(p);
}

// Called on every accepted state: track the certified tail and re-plan when
// a budget is exceeded.  Returns true when the plan changed.
bool on_accepted(Workspace& ws, const std::vector<double>& y) {
  if (!ws.cfg.mutation_enabled) return false;
  if (ws.space == Space::n) {
    ws.tail_run =
        std::max(ws.tail_run, ws.logK * ws.p_bar * vec_max_abs(y) * ws.plan.tail_rel);
    return false;
  }
  Measure m = measure_field(ws, y);
  if (ws.cfg.truncation_M > 0.0) {
    ws.tail_run = std::max(ws.tail_run, tail_bound_u(ws, ws.plan.M_eff, m.slope, m.gamma, m.drift));
    return false;
  }
  bool replan = m.slope > ws.plan.slope_budget || m.gamma > ws.plan.gamma_budget ||
                m.drift > ws.plan.drift_budget;
  if (replan) build_plan(ws, m);
  ws.tail_run = std::max(ws.tail_run, ws.plan.tail);
  return replan;
}

// du_i/dt = R_i + sum_l p_{i+l} w_l e^{log K (u_{i+l} - u_i)}, computed with
// exponentials shifted by the running maximum so every exp() argument is
// nonpositive, then shifted back per node.  `throw_on_guard` selects between
// raising SlopeBlowupError (accepted states, public entry points) and
// returning NaN so an adaptive trial step gets rejected instead.
void eval_rhs_u(Workspace& ws, const std::vector<double>& y, std::vector<double>& out,
                bool throw_on_guard) {
  const std::size_t N = ws.N;
  out.resize(N);
  if (!ws.cfg.mutation_enabled) {
    std::copy(ws.Rv.begin(), ws.Rv.end(), out.begin());
    return;
  }
  const double aL = ws.frozen ? ws.anchorL0 : y.front();
  const double aR = ws.frozen ? ws.anchorR0 : y.back();
  const double top = std::max({vec_max(y), aL, aR});
  const double gamma = ws.logK * (top - vec_min(y));
  if (!(gamma <= kExpGuard)) {
    if (throw_on_guard) {
      std::ostringstream os;
      os << "field range " << (top - vec_min(y)) << " times log K = " << ws.logK
         << " exceeds the safe exponent bound " << kExpGuard
         << "; the rescaled field is no longer compatible with the scaling";
      throw SlopeBlowupError(os.str());
    }
    std::fill(out.begin(), out.end(), kNaN);
    return;
  }
  const std::int64_t pad = ws.plan.pad;
  ws.q.resize(N + static_cast<std::size_t>(2 * pad));
  for (std::int64_t j = 0; j < pad; ++j) {
    double d = static_cast<double>(pad - j);
    ws.q[static_cast<std::size_t>(j)] =
        ws.plan.p_pad[static_cast<std::size_t>(j)] *
        std::exp(ws.logK * (aL - ws.s_b * d * ws.delta - top));
  }
  for (std::size_t v = 0; v < N; ++v)
    ws.q[static_cast<std::size_t>(pad) + v] =
        ws.plan.p_pad[static_cast<std::size_t>(pad) + v] * std::exp(ws.logK * (y[v] - top));
  for (std::int64_t d = 1; d <= pad; ++d) {
    std::size_t j = static_cast<std::size_t>(pad) + N - 1 + static_cast<std::size_t>(d);
    ws.q[j] = ws.plan.p_pad[j] * std::exp(ws.logK * (aR - ws.s_b * static_cast<double>(d) * ws.delta - top));
  }
  const double* qc = ws.q.data() + pad;          // qc[i + l], l in [-pad, pad]
  const double* wc = ws.plan.w.data() + pad;     // wc[l]
  const double* Rv = ws.Rv.data();
  const double logK = ws.logK;
  const std::vector<double>& yy = y;
  std::vector<double>& oo = out;
  parallel_for(N, [&, qc, wc, Rv, logK, pad](std::size_t i) {
    Accum acc;
    acc.add(wc[0] * qc[i]);
    const std::int64_t ii = static_cast<std::int64_t>(i);
    for (std::int64_t l = 1; l <= pad; ++l) {
      acc.add(wc[l] * qc[ii + l]);
      acc.add(wc[-l] * qc[ii - l]);
    }
    oo[i] = Rv[i] + std::exp(logK * (top - yy[i])) * acc.value();
  });
}

// Correlation S_i = sum_l w_l pn_{i+l} through FFTW: with b the zero-padded
// kernel row and a the padded density samples, conj(FFT(b)) * FFT(a) inverts
// to the circular cross-correlation, which is wrap-free here because the
// largest index touched, N - 1 + 2 pad, is the last sample of a.
void correlate_fft(const std::vector<double>& a_in, const std::vector<double>& w,
                   std::size_t N, std::vector<double>& out) {
  const std::size_t nfft = a_in.size();
  std::vector<double> a(nfft), b(nfft, 0.0), c(nfft);
  std::vector<std::complex<double>> A(nfft / 2 + 1), B(nfft / 2 + 1);
  fftw_plan pa = fftw_plan_dft_r2c_1d(static_cast<int>(nfft), a.data(),
                                      reinterpret_cast<fftw_complex*>(A.data()), FFTW_ESTIMATE);
  fftw_plan pb = fftw_plan_dft_r2c_1d(static_cast<int>(nfft), b.data(),
                                      reinterpret_cast<fftw_complex*>(B.data()), FFTW_ESTIMATE);
  fftw_plan pc = fftw_plan_dft_c2r_1d(static_cast<int>(nfft),
                                      reinterpret_cast<fftw_complex*>(A.data()), c.data(),
                                      FFTW_ESTIMATE);
  std::copy(a_in.begin(), a_in.end(), a.begin());
  std::copy(w.begin(), w.end(), b.begin());
  fftw_execute(pa);
  fftw_execute(pb);
  for (std::size_t k = 0; k < A.size(); ++k) A[k] = std::conj(B[k]) * A[k];
  fftw_execute(pc);
  fftw_destroy_plan(pa);
  fftw_destroy_plan(pb);
  fftw_destroy_plan(pc);
  const double scale = 1.0 / static_cast<double>(nfft);
  for (std::size_t i = 0; i < N; ++i) out[i] = c[i] * scale;
}

// dn_i/dt = log K * (R_i n_i + sum_l p_{i+l} w_l n_{i+l}).
void eval_rhs_n(Workspace& ws, const std::vector<double>& y, std::vector<double>& out,
                bool /*throw_on_guard*/) {
  const std::size_t N = ws.N;
  out.resize(N);
  if (!ws.cfg.mutation_enabled) {
    for (std::size_t i = 0; i < N; ++i) out[i] = ws.logK * ws.Rv[i] * y[i];
    return;
  }
  const double aL = ws.frozen ? ws.anchorL0 : y.front();
  const double aR = ws.frozen ? ws.anchorR0 : y.back();
  const std::int64_t pad = ws.plan.pad;
  ws.q.resize(N + static_cast<std::size_t>(2 * pad));
  for (std::int64_t j = 0; j < pad; ++j) {
    double d = static_cast<double>(pad - j);
    ws.q[static_cast<std::size_t>(j)] =
        ws.plan.p_pad[static_cast<std::size_t>(j)] * aL * std::exp(-ws.s_b * ws.h * d);
  }
  for (std::size_t v = 0; v < N; ++v)
    ws.q[static_cast<std::size_t>(pad) + v] = ws.plan.p_pad[static_cast<std::size_t>(pad) + v] * y[v];
  for (std::int64_t d = 1; d <= pad; ++d) {
    std::size_t j = static_cast<std::size_t>(pad) + N - 1 + static_cast<std::size_t>(d);
    ws.q[j] = ws.plan.p_pad[j] * aR * std::exp(-ws.s_b * ws.h * static_cast<double>(d));
  }
  if (ws.cfg.use_fft && ws.q.size() >= 64) {
    correlate_fft(ws.q, ws.plan.w, N, out);
    for (std::size_t i = 0; i < N; ++i) out[i] = ws.logK * (ws.Rv[i] * y[i] + out[i]);
    return;
  }
  const double* qc = ws.q.data() + pad;
  const double* wc = ws.plan.w.data() + pad;
  const double* Rv = ws.Rv.data();
  const double logK = ws.logK;
  const std::vector<double>& yy = y;
  std::vector<double>& oo = out;
  parallel_for(N, [&, qc, wc, Rv, logK, pad](std::size_t i) {
    Accum acc;
    acc.add(wc[0] * qc[i]);
    const std::int64_t ii = static_cast<std::int64_t>(i);
    for (std::int64_t l = 1; l <= pad; ++l) {
      acc.add(wc[l] * qc[ii + l]);
      acc.add(wc[-l] * qc[ii - l]);
    }
    oo[i] = logK * (Rv[i] * yy[i] + acc.value());
  });
}

Workspace make_workspace(const LatticeField& f, const ScalingParams& scaling,
                         const RateSpec& rates, const KernelSpec& kernel,
                         const IntegratorConfig& cfg) {
  if (f.space == Space::hj)
    throw std::invalid_argument("limit-equation fields carry no carrying-capacity scaling; "
                                "simulation needs a u- or n-space field");
  if (f.values.size() != static_cast<std::size_t>(f.window.size()))
    throw std::invalid_argument("field value count does not match its window");
  if (f.values.empty()) throw std::invalid_argument("field is empty");
  if (std::abs(f.window.step - scaling.delta_K) > 1e-9 * scaling.delta_K) {
    std::ostringstream os;
    os << "window step " << f.window.step << " does not match the lattice step delta_K = "
       << scaling.delta_K;
    throw std::invalid_argument(os.str());
  }
  if (!(cfg.tail_tol > 0.0)) throw std::invalid_argument("tail_tol must be positive");
  if (cfg.truncation_M < 0.0) throw std::invalid_argument("truncation_M must be >= 0 (0 = automatic)");
  if (!(cfg.rel_tol > 0.0) || !(cfg.abs_tol > 0.0))
    throw std::invalid_argument("integrator tolerances must be positive");
  if (!(cfg.dt_max > 0.0)) throw std::invalid_argument("dt_max must be positive");
  if (cfg.dt_init < 0.0) throw std::invalid_argument("dt_init must be >= 0 (0 = automatic)");

  Workspace ws;
  ws.scal = scaling;
  ws.win = f.window;
  ws.space = f.space;
  ws.rates = &rates;
  ws.kernel = &kernel;
  ws.cfg = cfg;
  ws.N = f.values.size();
  ws.delta = scaling.delta_K;
  ws.h = scaling.h_K;
  ws.logK = scaling.log_K;
  ws.p_bar = rates.p.upper;
  ws.f_bar = kernel.f_max();
  if (std::isnan(cfg.boundary_slope)) {
    if (f.space == Space::u) {
      ws.s_b = slope_of(f.values, ws.delta);
    } else {
      // Densities are measured in the rescaled variable log(n)/log K, so the
      // off-window decay matches the u-space run of the same data exactly.
      // Unit decay is the fallback when a sample is nonpositive.
      ws.s_b = 1.0;
      bool positive = all_finite(f.values);
      for (double v : f.values)
        if (!(v > 0.0)) positive = false;
      if (positive) {
        std::vector<double> logn(f.values.size());
        for (std::size_t v = 0; v < logn.size(); ++v)
          logn[v] = std::log(f.values[v]) / ws.logK;
        ws.s_b = slope_of(logn, ws.delta);
      }
    }
  } else {
    if (cfg.boundary_slope < 0.0)
      throw std::invalid_argument("boundary_slope must be >= 0 (NaN = measured from the data)");
    ws.s_b = cfg.boundary_slope;
  }
  ws.frozen = (cfg.boundary == Boundary::frozen);
  ws.anchorL0 = f.values.front();
  ws.anchorR0 = f.values.back();
  ws.Rv.resize(ws.N);
  for (std::size_t v = 0; v < ws.N; ++v)
    ws.Rv[v] = rates.R(static_cast<double>(ws.win.i_min + static_cast<std::int64_t>(v)) * ws.delta);
  return ws;
}

void eval_rhs(Workspace& ws, const std::vector<double>& y, std::vector<double>& out,
              bool throw_on_guard) {
  if (ws.space == Space::u)
    eval_rhs_u(ws, y, out, throw_on_guard);
  else
    eval_rhs_n(ws, y, out, throw_on_guard);
}

// ---------------------------------------------------------------------------
// Time integration
// ---------------------------------------------------------------------------

// Dormand-Prince 5(4) coefficients.
constexpr double kC[7] = {0.0, 1.0 / 5, 3.0 / 10, 4.0 / 5, 8.0 / 9, 1.0, 1.0};
constexpr double kA2[1] = {1.0 / 5};
constexpr double kA3[2] = {3.0 / 40, 9.0 / 40};
constexpr double kA4[3] = {44.0 / 45, -56.0 / 15, 32.0 / 9};
constexpr double kA5[4] = {19372.0 / 6561, -25360.0 / 2187, 64448.0 / 6561, -212.0 / 729};
constexpr double kA6[5] = {9017.0 / 3168, -355.0 / 33, 46732.0 / 5247, 49.0 / 176,
                           -5103.0 / 18656};
constexpr double kB5[7] = {35.0 / 384,      0.0, 500.0 / 1113, 125.0 / 192,
                           -2187.0 / 6784, 11.0 / 84, 0.0};
constexpr double kB4[7] = {5179.0 / 57600,     0.0,          7571.0 / 16695, 393.0 / 640,
                           -92097.0 / 339200,  187.0 / 2100, 1.0 / 40};

void axpy_stage(std::vector<double>& ytmp, const std::vector<double>& y, double dt,
                const double* a, const std::vector<std::vector<double>>& K, int stages) {
  const std::size_t n = y.size();
  for (std::size_t i = 0; i < n; ++i) {
    double acc = 0.0;
    for (int s = 0; s < stages; ++s) acc += a[s] * K[static_cast<std::size_t>(s)][i];
    ytmp[i] = y[i] + dt * acc;
  }
}

template <class Rhs, class OnAccept>
void advance_rk45(std::vector<double>& y, double t0, double t1, const IntegratorConfig& cfg,
                  double& dt, Rhs&& rhs, OnAccept&& on_accept) {
  const std::size_t n = y.size();
  std::vector<std::vector<double>> K(7, std::vector<double>(n));
  std::vector<double> ytmp(n), y5(n);
  double t = t0;
  rhs(y, K[0], true);
  bool have_k1 = true;
  if (dt <= 0.0) {
    double dt0 = 0.01 * (1.0 + vec_max_abs(y)) / (1.0 + vec_max_abs(K[0]));
    dt = std::clamp(dt0, 1e-8, cfg.dt_max);
  }
  long long steps = 0;
  const double t_eps = 1e-14 * std::max(1.0, std::abs(t1));
  while (t < t1 - t_eps) {
    if (++steps > 20000000LL)
      throw IntegrationError("step budget exhausted; the system appears stiffer than the "
                             "integrator tolerances allow");
    dt = std::min({dt, cfg.dt_max, t1 - t});
    if (!(dt > 1e-14 * std::max(1.0, std::abs(t1)))) {
      std::ostringstream os;
      os << "time step collapsed to " << dt << " at t = " << t;
      throw IntegrationError(os.str());
    }
    if (!have_k1) {
      rhs(y, K[0], true);
      have_k1 = true;
    }
    axpy_stage(ytmp, y, dt, kA2, K, 1);
    rhs(ytmp, K[1], false);
    axpy_stage(ytmp, y, dt, kA3, K, 2);
    rhs(ytmp, K[2], false);
    axpy_stage(ytmp, y, dt, kA4, K, 3);
    rhs(ytmp, K[3], false);
    axpy_stage(ytmp, y, dt, kA5, K, 4);
    rhs(ytmp, K[4], false);
    axpy_stage(ytmp, y, dt, kA6, K, 5);
    rhs(ytmp, K[5], false);
    axpy_stage(y5, y, dt, kB5, K, 6);  // kB5[6] = 0: six stages suffice
    rhs(y5, K[6], false);
    double err = 0.0;
    for (std::size_t i = 0; i < n; ++i) {
      double e = 0.0;
      for (int s = 0; s < 7; ++s) e += (kB5[s] - kB4[s]) * K[static_cast<std::size_t>(s)][i];
      e *= dt;
      double sc = cfg.abs_tol + cfg.rel_tol * std::max(std::abs(y[i]), std::abs(y5[i]));
      err = std::max(err, std::abs(e) / sc);
    }
    if (err <= 1.0) {  // NaN fails the comparison and rejects the step
      t += dt;
      y.swap(y5);
      K[0].swap(K[6]);  // first-same-as-last: k7 is the next step's k1
      have_k1 = true;
      if (on_accept(y)) have_k1 = false;  // plan changed: cached slope is stale
      double fac = (std::isfinite(err) && err > 0.0) ? 0.9 * std::pow(err, -0.2) : 5.0;
      dt *= std::clamp(fac, 0.2, 5.0);
    } else {
      double fac = std::isfinite(err) ? std::clamp(0.9 * std::pow(err, -0.2), 0.2, 1.0) : 0.2;
      dt *= fac;
    }
  }
}

template <class Rhs, class OnAccept>
void advance_rk4(std::vector<double>& y, double t0, double t1, double dt_base, Rhs&& rhs,
                 OnAccept&& on_accept) {
  const std::size_t n = y.size();
  double span = t1 - t0;
  long long m = std::max<long long>(1, static_cast<long long>(std::ceil(span / dt_base - 1e-9)));
  double dt = span / static_cast<double>(m);
  std::vector<double> k1(n), k2(n), k3(n), k4(n), ytmp(n);
  for (long long s = 0; s < m; ++s) {
    rhs(y, k1, true);
    for (std::size_t i = 0; i < n; ++i) ytmp[i] = y[i] + 0.5 * dt * k1[i];
    rhs(ytmp, k2, true);
    for (std::size_t i = 0; i < n; ++i) ytmp[i] = y[i] + 0.5 * dt * k2[i];
    rhs(ytmp, k3, true);
    for (std::size_t i = 0; i < n; ++i) ytmp[i] = y[i] + dt * k3[i];
    rhs(ytmp, k4, true);
    for (std::size_t i = 0; i < n; ++i)
      y[i] += dt / 6.0 * (k1[i] + 2.0 * k2[i] + 2.0 * k3[i] + k4[i]);
    if (!all_finite(y)) {
      std::ostringstream os;
      os << "state became non-finite at t = " << (t0 + dt * static_cast<double>(s + 1))
         << " with the fixed step " << dt;
      throw IntegrationError(os.str());
    }
    on_accept(y);
  }
}

}  // namespace

std::vector<double> rhs_u(const LatticeField& u, const ScalingParams& scaling,
                          const RateSpec& rates, const KernelSpec& kernel,
                          const IntegratorConfig& cfg) {
  if (u.space != Space::u)
    throw std::invalid_argument("rhs_u expects a u-space (rescaled log-density) field");
  Workspace ws = make_workspace(u, scaling, rates, kernel, cfg);
  build_plan(ws, measure_field(ws, u.values));
  std::vector<double> out;
  eval_rhs_u(ws, u.values, out, true);
  return out;
}

std::vector<double> rhs_n(const LatticeField& n, const ScalingParams& scaling,
                          const RateSpec& rates, const KernelSpec& kernel,
                          const IntegratorConfig& cfg) {
  if (n.space != Space::n)
    throw std::invalid_argument("rhs_n expects an n-space (density) field");
  Workspace ws = make_workspace(n, scaling, rates, kernel, cfg);
  build_plan(ws, Measure{});
  std::vector<double> out;
  eval_rhs_n(ws, n.values, out, true);
  return out;
}

Trajectory simulate(const LatticeField& initial, double T, const ScalingParams& scaling,
                    const RateSpec& rates, const KernelSpec& kernel, const IntegratorConfig& cfg,
                    std::vector<double> output_times) {
  Workspace ws = make_workspace(initial, scaling, rates, kernel, cfg);
  if (!(T > 0.0)) throw std::invalid_argument("final time must be positive");
  if (output_times.empty()) output_times = {0.0, T / 4, T / 2, 3 * T / 4, T};
  if (std::abs(output_times.front()) > 1e-12 * std::max(1.0, T))
    throw std::invalid_argument("output times must start at 0");
  output_times.front() = 0.0;
  for (std::size_t k = 1; k < output_times.size(); ++k)
    if (!(output_times[k] > output_times[k - 1]))
      throw std::invalid_argument("output times must increase strictly");
  if (std::abs(output_times.back() - T) > 1e-9 * std::max(1.0, T))
    throw std::invalid_argument("output times must end at the final time");
  output_times.back() = T;

  if (initial.space == Space::u) {
    double s0 = max_discrete_slope(initial);
    if (!(s0 < 1.0)) {
      std::ostringstream os;
      os << "initial discrete slope " << s0
         << " must stay below 1: the rescaled model requires a contractive log-density profile";
      throw std::invalid_argument(os.str());
    }
  } else {
    for (std::size_t v = 0; v < initial.values.size(); ++v)
      if (!(initial.values[v] >= 0.0)) {
        std::ostringstream os;
        os << "densities must be nonnegative; node " << v << " holds " << initial.values[v];
        throw std::invalid_argument(os.str());
      }
  }

  std::vector<double> y = initial.values;
  build_plan(ws, ws.space == Space::u ? measure_field(ws, y) : Measure{});
  on_accepted(ws, y);

  Trajectory traj;
  traj.scaling = scaling;
  traj.space = initial.space;
  auto record = [&](double t) {
    traj.times.push_back(t);
    traj.fields.push_back(LatticeField{ws.win, ws.space, y});
    traj.max_slopes.push_back(ws.space == Space::u ? slope_of(y, ws.delta) : 0.0);
  };
  record(0.0);

  auto rhs = [&](const std::vector<double>& yy, std::vector<double>& out, bool at_state) {
    eval_rhs(ws, yy, out, at_state);
  };
  auto accept = [&](const std::vector<double>& yy) { return on_accepted(ws, yy); };

  double dt_state = cfg.dt_init > 0.0 ? std::min(cfg.dt_init, cfg.dt_max) : 0.0;
  for (std::size_t k = 1; k < output_times.size(); ++k) {
    double t0 = output_times[k - 1], t1 = output_times[k];
    if (cfg.method == Method::rk4) {
      double dt_base = cfg.dt_init > 0.0 ? cfg.dt_init : cfg.dt_max;
      advance_rk4(y, t0, t1, dt_base, rhs, accept);
    } else {
      advance_rk45(y, t0, t1, cfg, dt_state, rhs, accept);
    }
    record(t1);
  }
  traj.tail_bound = ws.tail_run;
  return traj;
}

LatticeField hopf_cole(const LatticeField& field, const ScalingParams& scaling, HopfCole dir) {
  LatticeField out;
  out.window = field.window;
  out.values.resize(field.values.size());
  if (dir == HopfCole::to_u) {
    if (field.space != Space::n)
      throw std::invalid_argument("hopf_cole to_u expects a density field");
    out.space = Space::u;
    for (std::size_t v = 0; v < field.values.size(); ++v) {
      double n = field.values[v];
      if (!(n > 0.0)) {
        std::ostringstream os;
        os << "density at node " << v << " is " << n
           << "; the logarithmic transform needs strictly positive values";
        throw std::invalid_argument(os.str());
      }
      out.values[v] = std::log(n) / scaling.log_K;
    }
  } else {
    if (field.space != Space::u)
      throw std::invalid_argument("hopf_cole to_n expects a rescaled log-density field");
    out.space = Space::n;
    for (std::size_t v = 0; v < field.values.size(); ++v) {
      double e = field.values[v] * scaling.log_K;
      if (!(e <= 700.0)) {
        std::ostringstream os;
        os << "exponent " << e << " at node " << v
           << " exceeds the representable range; keep such runs in u-space";
        throw std::invalid_argument(os.str());
      }
      out.values[v] = std::exp(e);
    }
  }
  return out;
}

double mass_norm(const LatticeField& n) {
  if (n.space != Space::n)
    throw std::invalid_argument("mass_norm expects a density field");
  Accum acc;
  for (double x : n.values) acc.add(std::abs(x));
  return acc.value() * n.window.step;
}

}  // namespace selmut
