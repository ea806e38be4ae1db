#pragma once

#include <functional>
#include <string>

namespace selmut {

// Integral value together with a certified truncation remainder.  For the
// integral moments `tail_bound` covers mass outside [-M, M]; for lattice sums
// it covers the dropped terms |l*h| > M.
struct MomentResult {
  double value = 0.0;
  double tail_bound = 0.0;
  double truncation_M = 0.0;
};

enum class MomentMethod { automatic, closed_form, quadrature };

// Mutation kernel G(y) = f(y) * exp(-|y|) with a bounded profile
// 0 < f_min <= f <= f_max.  Construction certifies the normalisation
// integral(G) = 1 to 1e-8, spot-checks that sampled profile values stay
// inside the claimed bounds, and rejects profiles violating either.
class KernelSpec {
 public:
  KernelSpec(std::function<double(double)> profile, double f_min, double f_max,
             std::string name = "user");

  // f == 1/2: the reference kernel, all moments in closed form.
  static KernelSpec exponential();
  // f(y) = (1 + beta*cos y) / (2 + beta), beta in [0, 1); exercises the
  // quadrature paths with an exactly normalised non-constant profile.
  static KernelSpec cosine(double beta = 0.5);

  double profile(double y) const { return f_(y); }
  double density(double y) const;  // G(y)
  double f_min() const { return f_min_; }
  double f_max() const { return f_max_; }
  bool has_closed_forms() const { return closed_forms_; }
  const std::string& name() const { return name_; }

 private:
  std::function<double(double)> f_;
  double f_min_, f_max_;
  std::string name_;
  bool closed_forms_ = false;
};

// integral G(y) e^{a y} dy for |a| < 1 (closed form 1/(1-a^2) for the
// exponential kernel).  Throws DivergentMomentError for |a| >= 1.
MomentResult exp_moment(const KernelSpec& k, double a, double tol = 1e-10,
                        MomentMethod method = MomentMethod::automatic);

// integral G(y) e^{a |y|} dy for a in [0, 1) (closed form 1/(1-a)).
MomentResult abs_exp_moment(const KernelSpec& k, double a, double tol = 1e-10,
                            MomentMethod method = MomentMethod::automatic);

// integral |y| G(y) e^{a |y|} dy for a in [0, 1) (closed form 1/(1-a)^2);
// certified bound for |d/dq integral G e^{q y}| on |q| <= a.
MomentResult abs_first_moment(const KernelSpec& k, double a, double tol = 1e-10,
                              MomentMethod method = MomentMethod::automatic);

// d/dq integral G(y) e^{q y} dy = integral y G(y) e^{q y} dy, |q| < 1
// (closed form 2q/(1-q^2)^2 for the exponential kernel).
MomentResult exp_moment_derivative(const KernelSpec& k, double q, double tol = 1e-10,
                                   MomentMethod method = MomentMethod::automatic);

// Lattice sum  sum_{|l h| <= M} h G(l h) e^{a h |l|}  accumulated centre-outward
// with compensated summation; tail bound 2 f_max (1+h) e^{-(1-a)(M-h)} / (1-a).
// Requires h > 0, M >= h, 0 <= a < 1.
MomentResult discrete_exp_sum(const KernelSpec& k, double h, double a, double M);

// Smallest truncation half-width M with the discrete tail bound <= tol.
double truncation_M_for(const KernelSpec& k, double a, double h, double tol);

// Certified upper bound on sup over h in (0, 1] of the unsigned lattice sum
// above (the constant controlling the discrete mutation operator).  Computed
// as the maximum over a geometric h-sample and the continuous moment, inflated
// by the certified sample-variation factor f_max / f_min.
double alpha_bound(const KernelSpec& k, double a);

}  // namespace selmut
