#include "selmut/hj.hpp"

#include <algorithm>
#include <cmath>
#include <cstddef>
#include <cstdint>
#include <limits>
#include <sstream>
#include <stdexcept>
#include <string>
#include <vector>

#include "selmut/errors.hpp"
#include "selmut/parallel.hpp"

namespace selmut {
namespace {

constexpr double kInf = std::numeric_limits<double>::infinity();

// Exponential moment m(q) = integral G(y) e^{q y} dy of the kernel, together
// with a certified bound on |m'| over symmetric intervals (the quantity
// controlling the scheme's local speeds).  The reference kernel uses closed
// forms; other kernels are tabulated once per solve on the clamped gradient
// range, which keeps the numerical Hamiltonian piecewise linear in q with
// slopes dominated by the tabulated bound (m is convex, so chord slopes are
// largest at the ends of the range).
struct HamCache {
  bool closed = false;
  double qcap = 0.0;
  double qstar = 0.0;  // argmin of m, the sonic point of the Godunov flux
  std::vector<double> m_tab;
  double dq = 0.0;

  HamCache(const KernelSpec& k, double qcap_) : qcap(qcap_) {
    closed = k.has_closed_forms();
    if (closed) return;
    const std::size_t cells = 4096;
    dq = 2.0 * qcap / static_cast<double>(cells);
    m_tab.resize(cells + 1);
    for (std::size_t j = 0; j <= cells; ++j) {
      double q = -qcap + dq * static_cast<double>(j);
      m_tab[j] = exp_moment(k, q, 1e-10).value;
    }
    std::size_t jmin = 0;
    for (std::size_t j = 1; j <= cells; ++j)
      if (m_tab[j] < m_tab[jmin]) jmin = j;
    qstar = -qcap + dq * static_cast<double>(jmin);
  }

  double m(double q) const {
    q = std::clamp(q, -qcap, qcap);
    if (closed) return 1.0 / (1.0 - q * q);
    double s = (q + qcap) / dq;
    double jf = std::floor(s);
    std::size_t j = std::min(m_tab.size() - 2, static_cast<std::size_t>(std::max(0.0, jf)));
    double w = s - static_cast<double>(j);
    return m_tab[j] * (1.0 - w) + m_tab[j + 1] * w;
  }

  // Upper bound for |dm/dq| over [-a, a] (for the tabulated variant: over the
  // chords of the covering cells, which is what the interpolated H exhibits).
  double mp_abs(double a) const {
    a = std::clamp(a, 0.0, qcap);
    if (closed) {
      double d = 1.0 - a * a;
      return 2.0 * a / (d * d);
    }
    double s = (a + qcap) / dq;
    std::size_t hi = std::min(m_tab.size() - 2, static_cast<std::size_t>(std::ceil(s)));
    std::size_t lo_idx = static_cast<std::size_t>(
        std::max(0.0, std::floor((-a + qcap) / dq)));
    double left = std::abs(m_tab[lo_idx + 1] - m_tab[lo_idx]) / dq;
    double right = std::abs(m_tab[hi + 1] - m_tab[hi]) / dq;
    return std::max(left, right);
  }
};

void project_envelope(std::vector<double>& v, double cap) {
  for (std::size_t i = 1; i < v.size(); ++i) v[i] = std::min(v[i], v[i - 1] + cap);
  for (std::size_t i = v.size() - 1; i-- > 0;) v[i] = std::min(v[i], v[i + 1] + cap);
}

std::vector<double> default_times(double T) { return {0.0, T / 4, T / 2, 3 * T / 4, T}; }

void check_output_times(std::vector<double>& ts, double T) {
  if (std::abs(ts.front()) > 1e-12 * std::max(1.0, T))
    throw std::invalid_argument("output times must start at 0");
  ts.front() = 0.0;
  for (std::size_t k = 1; k < ts.size(); ++k)
    if (!(ts[k] > ts[k - 1])) throw std::invalid_argument("output times must increase strictly");
  if (std::abs(ts.back() - T) > 1e-9 * std::max(1.0, T))
    throw std::invalid_argument("output times must end at the final time");
  ts.back() = T;
}

}  // namespace

std::string to_string(HJScheme s) {
  return s == HJScheme::lf_projected ? "lf_projected" : "upwind_projected";
}

HJScheme hj_scheme_from_string(const std::string& s) {
  if (s == "lf_projected") return HJScheme::lf_projected;
  if (s == "upwind_projected") return HJScheme::upwind_projected;
  throw std::invalid_argument("unknown scheme '" + s +
                              "' (expected lf_projected or upwind_projected)");
}

HamiltonianEval hamiltonian_source(const RateSpec& rates, const KernelSpec& kernel, double x,
                                   double q) {
  HamiltonianEval ev;
  ev.x = x;
  ev.q = q;
  if (std::abs(q) >= 1.0) {
    ev.value = kInf;
    ev.finite = false;
    return ev;
  }
  ev.value = rates.R(x) + rates.p(x) * exp_moment(kernel, q).value;
  ev.finite = true;
  return ev;
}

LatticeField lipschitz_envelope(const LatticeField& f, double slope) {
  if (!(slope > 0.0)) throw std::invalid_argument("envelope slope must be positive");
  LatticeField out = f;
  if (!out.values.empty()) project_envelope(out.values, slope * f.window.step);
  return out;
}

Trajectory solve_hj(const InitialDataSpec& init, double T, const RateSpec& rates,
                    const KernelSpec& kernel, const HJGridConfig& grid,
                    std::vector<double> output_times) {
  if (!(grid.dx > 0.0)) throw std::invalid_argument("dx must be positive");
  if (!(grid.x_min < grid.x_max)) throw std::invalid_argument("x_min must be below x_max");
  if (!(grid.epsilon_clamp > 0.0) || !(grid.epsilon_clamp < 1.0))
    throw std::invalid_argument("epsilon_clamp must lie in (0, 1)");
  if (grid.dt < 0.0) throw std::invalid_argument("dt must be >= 0 (0 = automatic)");
  if (grid.viscosity_theta < 0.0)
    throw std::invalid_argument("viscosity_theta must be >= 0 (0 = automatic)");
  if (!(T > 0.0)) throw std::invalid_argument("final time must be positive");
  if (output_times.empty()) output_times = default_times(T);
  check_output_times(output_times, T);

  TraitWindow win = make_window(grid.x_min, grid.x_max, grid.dx);
  const std::size_t N = static_cast<std::size_t>(win.size());
  if (N < 3) throw std::invalid_argument("grid holds fewer than 3 nodes; decrease dx");
  const double dx = grid.dx;
  const double qcap = 1.0 - grid.epsilon_clamp;
  const bool upwind = grid.scheme == HJScheme::upwind_projected;

  std::vector<double> v(N), Rv(N), pv(N);
  for (std::size_t i = 0; i < N; ++i) {
    double x = win.node(win.i_min + static_cast<std::int64_t>(i));
    v[i] = init.u0(x);
    Rv[i] = rates.R(x);
    pv[i] = rates.p(x);
  }
  project_envelope(v, dx);  // hard constraint holds from the start

  HamCache ham(kernel, qcap);

  Trajectory traj;
  traj.space = Space::hj;
  auto record = [&](double t) {
    traj.times.push_back(t);
    LatticeField f;
    f.window = win;
    f.space = Space::hj;
    f.values = v;
    traj.max_slopes.push_back(max_discrete_slope(f));
    traj.fields.push_back(std::move(f));
  };
  record(0.0);

  std::vector<double> Hnum(N), theta(N);
  const double t_eps = 1e-12 * std::max(1.0, T);
  for (std::size_t kseg = 1; kseg < output_times.size(); ++kseg) {
    double t = output_times[kseg - 1];
    const double t1 = output_times[kseg];
    long long steps = 0;
    while (t < t1 - t_eps) {
      if (++steps > 100000000LL)
        throw IntegrationError("step budget exhausted in the limit-equation solve");
      parallel_for(N, [&](std::size_t i) {
        // Neumann ghosts: edge values copied outward.  Decaying data export
        // their characteristics, so the edge error stays at the edge; a
        // sloped ghost would instead fake a near-unit gradient there and both
        // shrink the monotone step bound and inject spurious dissipation.
        double vm = (i == 0) ? v[0] : v[i - 1];
        double vp = (i == N - 1) ? v[N - 1] : v[i + 1];
        double qm = std::clamp((v[i] - vm) / dx, -qcap, qcap);
        double qp = std::clamp((vp - v[i]) / dx, -qcap, qcap);
        double qloc = std::max(std::abs(qm), std::abs(qp));
        theta[i] = pv[i] * ham.mp_abs(qloc);
        if (upwind) {
          double mval;
          if (qm <= qp)
            mval = std::max(ham.m(qm), ham.m(qp));
          else
            mval = ham.m(std::clamp(ham.qstar, qp, qm));
          Hnum[i] = Rv[i] + pv[i] * mval;
        } else {
          double qc = std::clamp(0.5 * (qm + qp), -qcap, qcap);
          double diss = (grid.viscosity_theta > 0.0 ? grid.viscosity_theta : theta[i]) *
                        (vp - 2.0 * v[i] + vm) / (2.0 * dx);
          Hnum[i] = Rv[i] + pv[i] * ham.m(qc) + diss;
        }
      });
      double theta_max = 0.0;
      for (std::size_t i = 0; i < N; ++i) theta_max = std::max(theta_max, theta[i]);
      if (!upwind && grid.viscosity_theta > 0.0) {
        if (theta_max > grid.viscosity_theta * (1.0 + 1e-12)) {
          std::ostringstream os;
          os << "fixed dissipation coefficient " << grid.viscosity_theta
             << " is below the local speed bound " << theta_max
             << "; the scheme would lose monotonicity";
          throw IntegrationError(os.str());
        }
        theta_max = grid.viscosity_theta;
      }
      double dt_mon = dx / std::max(theta_max, 1.0);
      double dt_step;
      if (grid.dt > 0.0) {
        if (grid.dt > dt_mon * (1.0 + 1e-12)) {
          std::ostringstream os;
          os << "time step " << grid.dt << " violates the monotone step bound " << dt_mon
             << " set by the local speeds";
          throw IntegrationError(os.str());
        }
        dt_step = grid.dt;
      } else {
        dt_step = 0.9 * dt_mon;
      }
      dt_step = std::min(dt_step, t1 - t);
      for (std::size_t i = 0; i < N; ++i) v[i] += dt_step * Hnum[i];
      project_envelope(v, dx);
      t += dt_step;
      if (!std::isfinite(v[0]) || !std::isfinite(v[N / 2])) {
        std::ostringstream os;
        os << "limit-equation state became non-finite at t = " << t;
        throw IntegrationError(os.str());
      }
    }
    record(t1);
  }
  return traj;
}

LatticeField inf_convolution_time(const Trajectory& traj, double t, double gamma) {
  if (!(gamma > 0.0)) throw std::invalid_argument("gamma must be positive");
  if (traj.fields.empty()) throw std::invalid_argument("trajectory holds no fields");
  const std::vector<double>& S = traj.times;
  const std::size_t M = S.size();
  LatticeField out;
  out.window = traj.fields.front().window;
  out.space = traj.space;
  const std::size_t N = traj.fields.front().values.size();
  out.values.resize(N);

  auto u_at = [&](double s, std::size_t v) {
    // linear interpolation of the node value in time
    auto it = std::upper_bound(S.begin(), S.end(), s);
    std::size_t k = static_cast<std::size_t>(
        std::clamp<std::ptrdiff_t>(it - S.begin() - 1, 0, static_cast<std::ptrdiff_t>(M) - 2));
    double w = (M == 1) ? 0.0 : (s - S[k]) / (S[k + 1] - S[k]);
    w = std::clamp(w, 0.0, 1.0);
    if (M == 1) return traj.fields[0].values[v];
    return traj.fields[k].values[v] * (1.0 - w) + traj.fields[k + 1].values[v] * w;
  };

  for (std::size_t vnode = 0; vnode < N; ++vnode) {
    double best = kInf;
    std::size_t kmin = 0;
    for (std::size_t k = 0; k < M; ++k) {
      double g = traj.fields[k].values[vnode] + (t - S[k]) * (t - S[k]) / (gamma * gamma);
      if (g < best) {
        best = g;
        kmin = k;
      }
    }
    if (kmin > 0 && kmin + 1 < M) {
      // parabola through the bracketing samples; exact for u linear in time
      double s1 = S[kmin - 1], s2 = S[kmin], s3 = S[kmin + 1];
      double g1 = traj.fields[kmin - 1].values[vnode] + (t - s1) * (t - s1) / (gamma * gamma);
      double g2 = best;
      double g3 = traj.fields[kmin + 1].values[vnode] + (t - s3) * (t - s3) / (gamma * gamma);
      double denom = (s2 - s1) * (g2 - g3) - (s2 - s3) * (g2 - g1);
      if (std::abs(denom) > 1e-300) {
        double sstar = s2 - 0.5 *
                                ((s2 - s1) * (s2 - s1) * (g2 - g3) -
                                 (s2 - s3) * (s2 - s3) * (g2 - g1)) /
                                denom;
        sstar = std::clamp(sstar, s1, s3);
        double cand = u_at(sstar, vnode) + (t - sstar) * (t - sstar) / (gamma * gamma);
        best = std::min(best, cand);
      }
    }
    if (t >= S.front() && t <= S.back()) best = std::min(best, u_at(t, vnode));
    out.values[vnode] = best;
  }
  return out;
}

}  // namespace selmut
