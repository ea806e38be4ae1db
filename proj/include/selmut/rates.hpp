#pragma once

#include <functional>
#include <string>

#include "selmut/check_report.hpp"
#include "selmut/lattice.hpp"

namespace selmut {

// Scalar function of the trait together with certified constants
// lower <= f <= upper and |f(x) - f(y)| <= lip |x - y|.
struct BoundedFunction {
  std::function<double(double)> fn;
  double lower = 0.0;
  double upper = 0.0;
  double lip = 0.0;
  std::string family = "user";

  double operator()(double x) const { return fn(x); }

  static BoundedFunction constant(double value);
  // base + amp / (1 + ((x-center)/width)^2); Lipschitz constant
  // |amp| * 3*sqrt(3)/(8*width) attained at (x-center)/width = 1/sqrt(3).
  static BoundedFunction rational_bump(double amp, double center = 0.0, double width = 1.0,
                                       double base = 0.0);
  // offset + amp * sin(freq * x).
  static BoundedFunction sinusoidal(double offset, double amp, double freq = 1.0);
  // Certification by dense sampling on [x_lo, x_hi]; the sampled range and
  // Lipschitz estimate are inflated by the documented margin factor 1.05.
  static BoundedFunction from_samples(std::function<double(double)> fn, double x_lo, double x_hi,
                                      int n_samples = 20001);
};

// Growth rate R and mutation rate p with their certified constants.
// Construction enforces p.lower > 0.
struct RateSpec {
  BoundedFunction R;
  BoundedFunction p;
  RateSpec(BoundedFunction R_, BoundedFunction p_);
};

// Initial rescaled datum u0 with its claimed envelope constants:
//   u0(x) <= -A|x| + B1        (decay of the initial density)
//   |u0(x+d) - u0(x)| <= L |d| (Lipschitz constant, L in (0, 1))
struct InitialDataSpec {
  std::function<double(double)> u0;
  double A = 0.0;
  double B1 = 0.0;
  double L = 0.0;
  std::string family = "user";

  static InitialDataSpec cone(double height, double slope, double center = 0.0);
  static InitialDataSpec smoothed_cone(double height, double slope, double center = 0.0,
                                       double eps = 0.1);
  static InitialDataSpec two_cones(double height1, double slope1, double center1, double height2,
                                   double slope2, double center2);
  // Spatially constant datum.  Violates the decay envelope by construction;
  // validate_initial reports the failure, simulation remains possible on a
  // finite window.
  static InitialDataSpec flat(double level);
};

// Checks the envelope u0(i delta) <= -A|i delta| + B1 and the discrete slope
// bound |u0((i+1)delta) - u0(i delta)| <= L delta at every window node.
// Failures are reported, not thrown.
CheckReport validate_initial(const InitialDataSpec& init, const ScalingParams& scaling,
                             const TraitWindow& window);

// u-space field with u0 evaluated at the window nodes.
LatticeField sample_initial(const InitialDataSpec& init, const TraitWindow& window);

}  // namespace selmut
