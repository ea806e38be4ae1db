#pragma once

#include <cstdint>
#include <optional>
#include <string>
#include <vector>

namespace selmut {

// Which variable a field stores.  `u` is the rescaled log-density
// u = log(n)/log(K), `n` the raw density, `hj` a limit-equation solution
// (same arithmetic as `u`, but carries no carrying-capacity scaling).
enum class Space { u, n, hj };

std::string to_string(Space s);
Space space_from_string(const std::string& s);

// Carrying capacity K together with the derived lattice scales.  delta_K is
// the trait-step of the lattice and h_K = delta_K * log(K) the step of the
// rescaled mutation variable; the model regime requires 0 < h_K < 1.
struct ScalingParams {
  double K = 0.0;
  double log_K = 0.0;   // natural log
  double delta_K = 0.0;
  double h_K = 0.0;     // delta_K * log_K
};

// Rule mapping K to the lattice step delta_K.
struct DeltaRule {
  enum class Kind { power_law, explicit_step };
  Kind kind = Kind::power_law;
  double exponent = 2.0;  // power_law: delta_K = (log K)^(-exponent)
  double step = 0.0;      // explicit_step: delta_K given directly

  static DeltaRule power_law(double exponent = 2.0);
  static DeltaRule explicit_step(double step);
};

// Builds the scaling for a carrying capacity K > 1.  Throws
// std::invalid_argument if K <= 1 or if the resulting h_K is not in (0, 1).
ScalingParams make_scaling(double K, const DeltaRule& rule = DeltaRule::power_law());

// Uniform grid of trait nodes x_i = i * step with i in [i_min, i_max]; the
// index range is the largest one with every node inside [x_min, x_max].
struct TraitWindow {
  double x_min = 0.0;
  double x_max = 0.0;
  std::int64_t i_min = 0;
  std::int64_t i_max = 0;
  double step = 0.0;

  std::int64_t size() const { return i_max - i_min + 1; }
  double node(std::int64_t i) const { return static_cast<double>(i) * step; }
  double lo() const { return node(i_min); }
  double hi() const { return node(i_max); }
};

TraitWindow make_window(double x_min, double x_max, double step);

// One real value per lattice node of a window.
struct LatticeField {
  TraitWindow window;
  Space space = Space::u;
  std::vector<double> values;  // values[i - window.i_min] belongs to node i

  double& at(std::int64_t i) { return values[static_cast<std::size_t>(i - window.i_min)]; }
  double at(std::int64_t i) const { return values[static_cast<std::size_t>(i - window.i_min)]; }
};

LatticeField make_field(const TraitWindow& w, Space space, double fill = 0.0);

// Piecewise-linear interpolant through the node values,
// u_i * (1 - x/step + i) + u_{i+1} * (x/step - i) on each cell.
// Throws std::out_of_range if x lies outside the node range.
double interpolate(const LatticeField& f, double x);

// Largest discrete slope max_i |f_{i+1} - f_i| / step (0 for single-node fields).
double max_discrete_slope(const LatticeField& f);

// Time-indexed sequence of fields on a fixed window.
struct Trajectory {
  std::optional<ScalingParams> scaling;  // engaged for lattice runs, empty for limit solves
  Space space = Space::u;
  std::vector<double> times;             // strictly increasing, starting at 0
  std::vector<LatticeField> fields;      // one per time
  std::vector<double> max_slopes;        // per time; 0 for n-space runs
  double tail_bound = 0.0;               // certified mutation-sum truncation remainder

  const LatticeField& back() const { return fields.back(); }
};

// Field at an arbitrary time in [times.front(), times.back()], linearly
// interpolated in time between stored outputs.
LatticeField field_at_time(const Trajectory& traj, double t);

}  // namespace selmut
