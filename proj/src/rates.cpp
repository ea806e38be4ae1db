#include "selmut/rates.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <stdexcept>
#include <utility>

namespace selmut {

BoundedFunction BoundedFunction::constant(double value) {
  BoundedFunction b;
  b.fn = [value](double) { return value; };
  b.lower = b.upper = value;
  b.lip = 0.0;
  b.family = "constant";
  return b;
}

BoundedFunction BoundedFunction::rational_bump(double amp, double center, double width,
                                               double base) {
  if (!(width > 0.0)) throw std::invalid_argument("rational_bump width must be positive");
  BoundedFunction b;
  b.fn = [amp, center, width, base](double x) {
    double s = (x - center) / width;
    return base + amp / (1.0 + s * s);
  };
  b.lower = std::min(base, base + amp);
  b.upper = std::max(base, base + amp);
  b.lip = std::abs(amp) * 3.0 * std::sqrt(3.0) / (8.0 * width);
  b.family = "rational_bump";
  return b;
}

BoundedFunction BoundedFunction::sinusoidal(double offset, double amp, double freq) {
  BoundedFunction b;
  b.fn = [offset, amp, freq](double x) { return offset + amp * std::sin(freq * x); };
  b.lower = offset - std::abs(amp);
  b.upper = offset + std::abs(amp);
  b.lip = std::abs(amp * freq);
  b.family = "sinusoidal";
  return b;
}

BoundedFunction BoundedFunction::from_samples(std::function<double(double)> fn, double x_lo,
                                              double x_hi, int n_samples) {
  if (!fn) throw std::invalid_argument("from_samples requires a callable");
  if (!(x_lo < x_hi)) throw std::invalid_argument("from_samples requires x_lo < x_hi");
  if (n_samples < 3) throw std::invalid_argument("from_samples requires at least 3 samples");
  constexpr double kMargin = 1.05;
  double dx = (x_hi - x_lo) / (n_samples - 1);
  double lo = fn(x_lo), hi = lo, lip = 0.0, prev = lo;
  for (int i = 1; i < n_samples; ++i) {
    double v = fn(x_lo + i * dx);
    lo = std::min(lo, v);
    hi = std::max(hi, v);
    lip = std::max(lip, std::abs(v - prev) / dx);
    prev = v;
  }
  BoundedFunction b;
  b.fn = std::move(fn);
  double mid = 0.5 * (lo + hi), half = 0.5 * (hi - lo);
  b.lower = mid - kMargin * half;
  b.upper = mid + kMargin * half;
  b.lip = kMargin * lip;
  b.family = "user";
  return b;
}

RateSpec::RateSpec(BoundedFunction R_, BoundedFunction p_)
    : R(std::move(R_)), p(std::move(p_)) {
  if (!(p.lower > 0.0))
    throw std::invalid_argument("mutation rate p must be bounded below by a positive constant "
                                "(certified lower bound " + std::to_string(p.lower) + ")");
  if (!(R.lower <= R.upper) || !(p.lower <= p.upper))
    throw std::invalid_argument("rate bounds are inconsistent (lower > upper)");
}

InitialDataSpec InitialDataSpec::cone(double height, double slope, double center) {
  if (!(slope > 0.0) || !(slope < 1.0))
    throw std::invalid_argument("cone slope must lie in (0, 1)");
  InitialDataSpec s;
  s.u0 = [height, slope, center](double x) { return height - slope * std::abs(x - center); };
  s.A = slope;
  s.B1 = height + slope * std::abs(center);
  s.L = slope;
  s.family = "cone";
  return s;
}

InitialDataSpec InitialDataSpec::smoothed_cone(double height, double slope, double center,
                                               double eps) {
  if (!(slope > 0.0) || !(slope < 1.0))
    throw std::invalid_argument("smoothed_cone slope must lie in (0, 1)");
  if (!(eps > 0.0)) throw std::invalid_argument("smoothed_cone eps must be positive");
  InitialDataSpec s;
  s.u0 = [height, slope, center, eps](double x) {
    double d = x - center;
    return height - slope * (std::sqrt(eps * eps + d * d) - eps);
  };
  // sqrt(eps^2 + d^2) >= |d|, hence u0 <= height + slope*eps - slope|x - center|.
  s.A = slope;
  s.B1 = height + slope * eps + slope * std::abs(center);
  s.L = slope;
  s.family = "smoothed_cone";
  return s;
}

InitialDataSpec InitialDataSpec::two_cones(double height1, double slope1, double center1,
                                           double height2, double slope2, double center2) {
  InitialDataSpec c1 = cone(height1, slope1, center1);
  InitialDataSpec c2 = cone(height2, slope2, center2);
  InitialDataSpec s;
  s.u0 = [f = c1.u0, g = c2.u0](double x) { return std::min(f(x), g(x)); };
  // min(...) <= first cone, so the first cone's envelope is one valid claim.
  s.A = c1.A;
  s.B1 = c1.B1;
  s.L = std::max(slope1, slope2);
  s.family = "two_cones";
  return s;
}

InitialDataSpec InitialDataSpec::flat(double level) {
  InitialDataSpec s;
  s.u0 = [level](double) { return level; };
  s.A = 1.0;   // unsatisfiable on an unbounded window: validate_initial reports it
  s.B1 = level;
  s.L = 0.5;
  s.family = "flat";
  return s;
}

CheckReport validate_initial(const InitialDataSpec& init, const ScalingParams& scaling,
                             const TraitWindow& window) {
  CheckReport rep;
  rep.check_id = "initial_data";
  rep.tolerance = 1e-12;
  if (window.step != scaling.delta_K)
    throw std::invalid_argument("window step does not match the scaling lattice step");

  double worst = -std::numeric_limits<double>::infinity();
  double worst_trait = window.lo();
  auto consider = [&](double violation, double trait) {
    if (violation > worst) {
      worst = violation;
      worst_trait = trait;
    }
  };

  double prev = init.u0(window.lo());
  for (std::int64_t i = window.i_min; i <= window.i_max; ++i) {
    double x = window.node(i);
    double v = init.u0(x);
    consider(v - (-init.A * std::abs(x) + init.B1), x);  // decay envelope excess
    if (i > window.i_min) {
      double slope = std::abs(v - prev) / scaling.delta_K;
      consider(slope - init.L, x);  // discrete Lipschitz excess
    }
    prev = v;
  }
  rep.worst_margin = worst;
  rep.worst_location = {{"trait", worst_trait}};
  rep.passed = worst <= rep.tolerance;
  return rep;
}

LatticeField sample_initial(const InitialDataSpec& init, const TraitWindow& window) {
  LatticeField f = make_field(window, Space::u);
  for (std::int64_t i = window.i_min; i <= window.i_max; ++i)
    f.at(i) = init.u0(window.node(i));
  return f;
}

}  // namespace selmut
