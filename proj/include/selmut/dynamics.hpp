#pragma once

#include <limits>
#include <vector>

#include "selmut/kernel.hpp"
#include "selmut/lattice.hpp"
#include "selmut/rates.hpp"

namespace selmut {

// Off-window closure of a field: either extended with a decaying cone of the
// configured slope, or frozen at the initial datum's extension.
enum class Boundary { decay_extrapolation, frozen };

enum class Method { rk4, rk45_adaptive };

struct IntegratorConfig {
  Method method = Method::rk45_adaptive;
  double dt_init = 0.0;   // 0: chosen from the initial right-hand side
  double dt_max = 0.05;
  double rel_tol = 1e-8;
  double abs_tol = 1e-10;
  // Mutation-sum half-width in h_K units; 0 selects the certified automatic
  // plan (tail <= tail_tol from the measured slope / field range).
  double truncation_M = 0.0;
  double tail_tol = 1e-8;
  Boundary boundary = Boundary::decay_extrapolation;
  // Slope of the off-window cone; NaN picks the measured initial slope.
  double boundary_slope = std::numeric_limits<double>::quiet_NaN();
  bool mutation_enabled = true;  // test hook: false zeroes the kernel row
  bool use_fft = false;          // n-space fast path routed through FFT
};

// Right-hand side of the rescaled log-density system,
//   du_i/dt = R(i delta) + sum_l p((l+i) delta) h G(l h) e^{log K (u_{l+i} - u_i)},
// truncated to |l h| <= M with a certified tail.  Throws SlopeBlowupError when
// an exponent would exceed the safe exp() range.
std::vector<double> rhs_u(const LatticeField& u, const ScalingParams& scaling,
                          const RateSpec& rates, const KernelSpec& kernel,
                          const IntegratorConfig& cfg);

// Right-hand side of the density system in cleared form,
//   dn_i/dt = log K * (R(i delta) n_i + sum_l p((l+i) delta) h G(l h) n_{l+i}).
std::vector<double> rhs_n(const LatticeField& n, const ScalingParams& scaling,
                          const RateSpec& rates, const KernelSpec& kernel,
                          const IntegratorConfig& cfg);

// Integrates the system from `initial` (u- or n-space) over [0, T], storing
// the field at each requested output time.  `output_times` must start at 0,
// increase strictly and end at T; empty selects {0, T/4, T/2, 3T/4, T}.
Trajectory simulate(const LatticeField& initial, double T, const ScalingParams& scaling,
                    const RateSpec& rates, const KernelSpec& kernel, const IntegratorConfig& cfg,
                    std::vector<double> output_times = {});

enum class HopfCole { to_u, to_n };

// u = log(n)/log K  /  n = K^u = e^{u log K}.  to_u requires n > 0 everywhere;
// to_n rejects exponents beyond the safe exp() range.
LatticeField hopf_cole(const LatticeField& field, const ScalingParams& scaling, HopfCole dir);

// l1 mass of an n-space field.
double mass_norm(const LatticeField& n);

}  // namespace selmut
