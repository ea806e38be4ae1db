#include "selmut/lattice.hpp"

#include <atomic>
#include <cmath>
#include <stdexcept>

#include "selmut/parallel.hpp"

namespace selmut {

namespace {
std::atomic<int> g_max_threads{0};
}

void set_max_threads(int n) { g_max_threads.store(n < 0 ? 0 : n); }

int max_threads() {
  int n = g_max_threads.load();
  if (n > 0) return n;
  unsigned hw = std::thread::hardware_concurrency();
  return hw == 0 ? 1 : static_cast<int>(hw);
}

std::string to_string(Space s) {
  switch (s) {
    case Space::u: return "u";
    case Space::n: return "n";
    case Space::hj: return "hj";
  }
  return "?";
}

Space space_from_string(const std::string& s) {
  if (s == "u") return Space::u;
  if (s == "n") return Space::n;
  if (s == "hj") return Space::hj;
  throw std::invalid_argument("unknown field space '" + s + "' (expected u, n or hj)");
}

DeltaRule DeltaRule::power_law(double exponent) {
  if (!(exponent > 0.0)) throw std::invalid_argument("power_law exponent must be positive");
  DeltaRule r;
  r.kind = Kind::power_law;
  r.exponent = exponent;
  return r;
}

DeltaRule DeltaRule::explicit_step(double step) {
  if (!(step > 0.0)) throw std::invalid_argument("explicit lattice step must be positive");
  DeltaRule r;
  r.kind = Kind::explicit_step;
  r.step = step;
  return r;
}

ScalingParams make_scaling(double K, const DeltaRule& rule) {
  if (!(K > 1.0)) throw std::invalid_argument("carrying capacity K must exceed 1");
  ScalingParams s;
  s.K = K;
  s.log_K = std::log(K);
  s.delta_K = rule.kind == DeltaRule::Kind::power_law ? std::pow(s.log_K, -rule.exponent)
                                                      : rule.step;
  s.h_K = s.delta_K * s.log_K;
  if (!(s.h_K > 0.0) || !(s.h_K < 1.0))
    throw std::invalid_argument("scaling regime requires 0 < delta_K * log K < 1 (got h_K = " +
                                std::to_string(s.h_K) + "); increase K or shrink delta_K");
  return s;
}

TraitWindow make_window(double x_min, double x_max, double step) {
  if (!(step > 0.0)) throw std::invalid_argument("window step must be positive");
  if (!(x_min < x_max)) throw std::invalid_argument("window requires x_min < x_max");
  TraitWindow w;
  w.x_min = x_min;
  w.x_max = x_max;
  w.step = step;
  // Tolerant rounding so that analytically-exact endpoints land on nodes.
  w.i_min = static_cast<std::int64_t>(std::ceil(x_min / step - 1e-9));
  w.i_max = static_cast<std::int64_t>(std::floor(x_max / step + 1e-9));
  if (w.i_min > w.i_max)
    throw std::invalid_argument("window [" + std::to_string(x_min) + ", " + std::to_string(x_max) +
                                "] contains no lattice node of step " + std::to_string(step));
  return w;
}

LatticeField make_field(const TraitWindow& w, Space space, double fill) {
  LatticeField f;
  f.window = w;
  f.space = space;
  f.values.assign(static_cast<std::size_t>(w.size()), fill);
  return f;
}

double interpolate(const LatticeField& f, double x) {
  const TraitWindow& w = f.window;
  double lo = w.lo(), hi = w.hi();
  double slack = 1e-12 * (1.0 + std::abs(lo) + std::abs(hi));
  if (x < lo - slack || x > hi + slack)
    throw std::out_of_range("interpolation query x = " + std::to_string(x) +
                            " outside node range [" + std::to_string(lo) + ", " +
                            std::to_string(hi) + "]");
  if (w.size() == 1) return f.values[0];
  double s = x / w.step;
  auto i = static_cast<std::int64_t>(std::floor(s));
  if (i < w.i_min) i = w.i_min;
  if (i >= w.i_max) i = w.i_max - 1;
  double t = s - static_cast<double>(i);  // in [0, 1] up to the slack above
  return f.at(i) * (1.0 - t) + f.at(i + 1) * t;
}

double max_discrete_slope(const LatticeField& f) {
  double m = 0.0;
  for (std::size_t j = 1; j < f.values.size(); ++j)
    m = std::max(m, std::abs(f.values[j] - f.values[j - 1]));
  return f.window.size() > 1 ? m / f.window.step : 0.0;
}

LatticeField field_at_time(const Trajectory& traj, double t) {
  if (traj.times.empty()) throw std::invalid_argument("empty trajectory");
  double slack = 1e-9 * (1.0 + std::abs(traj.times.back()));
  if (t < traj.times.front() - slack || t > traj.times.back() + slack)
    throw std::out_of_range("time " + std::to_string(t) + " outside trajectory range");
  if (t <= traj.times.front()) return traj.fields.front();
  if (t >= traj.times.back()) return traj.fields.back();
  std::size_t k = 1;
  while (traj.times[k] < t) ++k;
  double t0 = traj.times[k - 1], t1 = traj.times[k];
  if (t1 <= t0) return traj.fields[k];
  double w = (t - t0) / (t1 - t0);
  LatticeField out = traj.fields[k - 1];
  for (std::size_t j = 0; j < out.values.size(); ++j)
    out.values[j] = (1.0 - w) * traj.fields[k - 1].values[j] + w * traj.fields[k].values[j];
  return out;
}

}  // namespace selmut
