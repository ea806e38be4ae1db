#pragma once

#include <string>
#include <vector>

#include "selmut/kernel.hpp"
#include "selmut/lattice.hpp"
#include "selmut/rates.hpp"

namespace selmut {

// Monotone discretisations of the constrained limit equation.  Both apply the
// hard Lipschitz projection after every explicit step; they differ in the
// numerical Hamiltonian (central with local dissipation vs. Godunov upwind).
enum class HJScheme { lf_projected, upwind_projected };

std::string to_string(HJScheme s);
HJScheme hj_scheme_from_string(const std::string& s);

struct HJGridConfig {
  double x_min = -6.0;
  double x_max = 6.0;
  double dx = 0.01;
  double dt = 0.0;               // 0: largest step allowed by the speed bound
  double epsilon_clamp = 1e-3;   // gradients entering H are capped at 1 - this
  double viscosity_theta = 0.0;  // 0: certified local speed bound per node
  HJScheme scheme = HJScheme::lf_projected;
};

struct HamiltonianEval {
  double x = 0.0;
  double q = 0.0;
  double value = 0.0;
  bool finite = false;
};

// Source Hamiltonian H(x, q) = R(x) + p(x) * integral G(y) e^{q y} dy.
// The moment diverges for |q| >= 1: such evaluations return finite = false
// (value +infinity) rather than throwing.
HamiltonianEval hamiltonian_source(const RateSpec& rates, const KernelSpec& kernel, double x,
                                   double q);

// Largest `slope`-Lipschitz minorant of the node values, i.e. the cone
// inf-convolution min_j (v_j + slope |i - j| dx).  One forward and one
// backward sweep compute it exactly on the grid.
LatticeField lipschitz_envelope(const LatticeField& f, double slope = 1.0);

// Solves the constrained limit equation  w_t = H(x, w_x),  |w_x| <= 1,
// by explicit monotone steps of the clamped Hamiltonian followed by the hard
// Lipschitz projection.  Output fields live in hj space and satisfy the
// discrete 1-Lipschitz bound exactly; the trajectory carries no scaling.
// `output_times` must start at 0, increase strictly and end at T; empty
// selects {0, T/4, T/2, 3T/4, T}.
Trajectory solve_hj(const InitialDataSpec& init, double T, const RateSpec& rates,
                    const KernelSpec& kernel, const HJGridConfig& grid,
                    std::vector<double> output_times = {});

// Quadratic time-regularisation  min_s [ u(s, x) + (t - s)^2 / gamma^2 ]
// over the trajectory's stored times, sharpened by a three-point parabola fit
// around the discrete argmin (exact whenever u is linear in time there) and
// by the direct candidate s = t.
LatticeField inf_convolution_time(const Trajectory& traj, double t, double gamma);

}  // namespace selmut
