#include <doctest.h>

#include <cmath>
#include <stdexcept>
#include <vector>

#include "selmut/errors.hpp"
#include "selmut/kernel.hpp"
#include "test_helpers.hpp"

using namespace selmut;
using test_helpers::exp_lattice_sum;

TEST_SUITE("kernel") {
  TEST_CASE("exponential kernel closed-form moments") {
    KernelSpec k = KernelSpec::exponential();
    CHECK(k.has_closed_forms());
    CHECK(k.f_min() == 0.5);
    CHECK(k.f_max() == 0.5);
    CHECK(k.density(0.0) == doctest::Approx(0.5).epsilon(1e-15));
    CHECK(k.density(1.0) == doctest::Approx(0.5 * std::exp(-1.0)).epsilon(1e-15));

    CHECK(exp_moment(k, 0.0).value == doctest::Approx(1.0).epsilon(1e-12));
    CHECK(exp_moment(k, 0.5).value == doctest::Approx(1.0 / 0.75).epsilon(1e-12));
    CHECK(exp_moment(k, -0.5).value == doctest::Approx(1.0 / 0.75).epsilon(1e-12));
    CHECK(exp_moment(k, 0.9).value == doctest::Approx(1.0 / 0.19).epsilon(1e-12));

    CHECK(abs_exp_moment(k, 0.5).value == doctest::Approx(2.0).epsilon(1e-12));
    CHECK(abs_first_moment(k, 0.5).value == doctest::Approx(4.0).epsilon(1e-12));
    CHECK(exp_moment_derivative(k, 0.0).value == doctest::Approx(0.0).epsilon(1e-12));
    CHECK(exp_moment_derivative(k, 0.95).value ==
          doctest::Approx(199.86850756081512).epsilon(1e-10));
  }

  TEST_CASE("quadrature agrees with the closed forms") {
    KernelSpec k = KernelSpec::exponential();
    for (double a : {0.0, 0.3, 0.7, 0.95}) {
      MomentResult closed = exp_moment(k, a, 1e-10, MomentMethod::closed_form);
      MomentResult quad = exp_moment(k, a, 1e-10, MomentMethod::quadrature);
      CHECK(std::abs(closed.value - quad.value) <=
            1e-6 * std::max(1.0, std::abs(closed.value)));
      CHECK(quad.tail_bound >= 0.0);
    }
    MomentResult dc = exp_moment_derivative(k, 0.6, 1e-10, MomentMethod::closed_form);
    MomentResult dq = exp_moment_derivative(k, 0.6, 1e-10, MomentMethod::quadrature);
    CHECK(std::abs(dc.value - dq.value) <= 1e-6 * std::abs(dc.value));
  }

  TEST_CASE("cosine kernel is normalised and bounded") {
    KernelSpec k = KernelSpec::cosine(0.5);
    CHECK_FALSE(k.has_closed_forms());
    CHECK(k.f_min() == doctest::Approx(0.5 / 2.5).epsilon(1e-15));
    CHECK(k.f_max() == doctest::Approx(1.5 / 2.5).epsilon(1e-15));
    // integral (1 + b cos y) e^{-|y|} dy = 2 + b, so the normalisation is exact
    CHECK(exp_moment(k, 0.0).value == doctest::Approx(1.0).epsilon(1e-8));
    // oracle: integral cos(y) e^{(a-1)|y|} symmetrised, a = 0.5:
    //   I(a) = (1-a) / ((1-a)^2 + 1), moment = (1/(1-a^2)·? ) computed directly:
    //   integral e^{ay-|y|} dy = 2/(1-a^2); integral cos y e^{ay-|y|} dy
    //     = (1-a)/((1-a)^2+1) + (1+a)/((1+a)^2+1)
    double a = 0.5, b = 0.5;
    double plain = 2.0 / (1.0 - a * a);
    double cosy = (1.0 - a) / ((1.0 - a) * (1.0 - a) + 1.0) +
                  (1.0 + a) / ((1.0 + a) * (1.0 + a) + 1.0);
    double oracle = (plain + b * cosy) / (2.0 + b);
    MomentResult m = exp_moment(k, a);
    CHECK(m.value == doctest::Approx(oracle).epsilon(1e-8));
    CHECK_THROWS_AS(KernelSpec::cosine(1.0), std::invalid_argument);
    CHECK_THROWS_AS(KernelSpec::cosine(-0.1), std::invalid_argument);
  }

  TEST_CASE("divergent moments are rejected") {
    KernelSpec k = KernelSpec::exponential();
    CHECK_THROWS_AS(exp_moment(k, 1.0), DivergentMomentError);
    CHECK_THROWS_AS(exp_moment(k, -1.2), DivergentMomentError);
    CHECK_THROWS_AS(abs_exp_moment(k, 1.0), DivergentMomentError);
    CHECK_THROWS_AS(exp_moment_derivative(k, 1.0), DivergentMomentError);
  }

  TEST_CASE("user kernels must be normalised with positive bounded profile") {
    // f = 1 gives integral 2, twice too heavy
    CHECK_THROWS_AS(KernelSpec([](double) { return 1.0; }, 1.0, 1.0), std::invalid_argument);
    CHECK_THROWS_AS(KernelSpec([](double) { return 0.5; }, 0.0, 0.5), std::invalid_argument);
    CHECK_THROWS_AS(KernelSpec([](double) { return 0.5; }, 0.6, 1.0), std::invalid_argument);
    KernelSpec ok([](double) { return 0.5; }, 0.5, 0.5, "custom");
    CHECK(ok.name() == "custom");
    CHECK(exp_moment(ok, 0.25).value == doctest::Approx(1.0 / (1.0 - 0.0625)).epsilon(1e-6));
  }

  TEST_CASE("lattice sums match the geometric closed form") {
    KernelSpec k = KernelSpec::exponential();
    struct Probe { double h, a, frozen; };
    const Probe probes[] = {
        {1.0, 0.0, 1.0819767068693265},
        {1.0, 0.5, 2.0414940825367984},
        {1.0, 0.9, 10.008331944775056},
        {0.01, 0.0, 1.0000083333194498},
    };
    for (const Probe& p : probes) {
      double M = p.h + 60.0 / (1.0 - p.a);  // tail below 1e-24
      MomentResult s = discrete_exp_sum(k, p.h, p.a, M);
      CHECK(s.value == doctest::Approx(p.frozen).epsilon(1e-13));
      CHECK(s.value == doctest::Approx(exp_lattice_sum(p.h, p.a)).epsilon(1e-13));
      CHECK(s.tail_bound <= 1e-20);
    }
  }

  TEST_CASE("lattice sum truncation error shrinks within its certificate") {
    KernelSpec k = KernelSpec::exponential();
    for (double a : {0.0, 0.5}) {
      double full = exp_lattice_sum(0.5, a);
      double prev_err = 1e300;
      // The certified tail decays like exp(-(1-a)M), so a fixed final M
      // cannot serve both rates; end the ladder at the half-width the
      // library itself certifies for a 1e-11 tail.
      double M_final = truncation_M_for(k, a, 0.5, 1e-11);
      CHECK(M_final > 16.0);
      for (double M : {2.0, 4.0, 8.0, 16.0, M_final}) {
        MomentResult s = discrete_exp_sum(k, 0.5, a, M);
        double err = std::abs(s.value - full);
        CHECK(err <= s.tail_bound);
        CHECK(err < prev_err);
        prev_err = err;
      }
      CHECK(prev_err <= 1e-10);
    }
  }

  TEST_CASE("truncation_M_for certifies the requested tail") {
    KernelSpec k = KernelSpec::exponential();
    for (double a : {0.0, 0.4, 0.9}) {
      for (double tol : {1e-6, 1e-10}) {
        double M = truncation_M_for(k, a, 0.1, tol);
        CHECK(M >= 0.1);
        MomentResult s = discrete_exp_sum(k, 0.1, a, M);
        CHECK(s.tail_bound <= tol * (1.0 + 1e-12));
      }
    }
  }

  TEST_CASE("alpha bound dominates the lattice sums uniformly in h") {
    KernelSpec k = KernelSpec::exponential();
    double a0 = alpha_bound(k, 0.0);
    CHECK(a0 >= 1.0);
    CHECK(a0 <= 1.2);
    CHECK(alpha_bound(k, 0.5) >= a0);
    for (double a : {0.0, 0.5, 0.9}) {
      double bound = alpha_bound(k, a);
      for (double h : {0.01, 0.05, 0.2, 0.5, 0.9, 1.0})
        CHECK(exp_lattice_sum(h, a) <= bound * (1.0 + 1e-12));
    }
    KernelSpec c = KernelSpec::cosine(0.5);
    CHECK(alpha_bound(c, 0.0) >= exp_moment(c, 0.0).value - 1e-9);
  }
}
