// Python bindings for the core operations: kernels and their moments,
// lattice runs, the limit-equation solver and the structural checks.

#include <pybind11/functional.h>
#include <pybind11/pybind11.h>
#include <pybind11/stl.h>

#include <stdexcept>
#include <string>

#include "selmut/analysis.hpp"
#include "selmut/config.hpp"
#include "selmut/dynamics.hpp"
#include "selmut/errors.hpp"
#include "selmut/hj.hpp"
#include "selmut/io.hpp"
#include "selmut/kernel.hpp"
#include "selmut/lattice.hpp"
#include "selmut/rates.hpp"

namespace py = pybind11;
using namespace selmut;

namespace {

Method method_from_string(const std::string& s) {
  if (s == "rk4") return Method::rk4;
  if (s == "rk45_adaptive") return Method::rk45_adaptive;
  throw std::invalid_argument("method must be rk4 or rk45_adaptive");
}

std::string method_to_string(Method m) { return m == Method::rk4 ? "rk4" : "rk45_adaptive"; }

Boundary boundary_from_string(const std::string& s) {
  if (s == "decay_extrapolation") return Boundary::decay_extrapolation;
  if (s == "frozen") return Boundary::frozen;
  throw std::invalid_argument("boundary must be decay_extrapolation or frozen");
}

std::string boundary_to_string(Boundary b) {
  return b == Boundary::decay_extrapolation ? "decay_extrapolation" : "frozen";
}

}  // namespace

PYBIND11_MODULE(_core, m) {
  m.doc() = "Rescaled selection-mutation lattice dynamics and their constrained "
            "Hamilton-Jacobi limit";

  py::class_<ScalingParams>(m, "ScalingParams")
      .def_readonly("K", &ScalingParams::K)
      .def_readonly("log_K", &ScalingParams::log_K)
      .def_readonly("delta_K", &ScalingParams::delta_K)
      .def_readonly("h_K", &ScalingParams::h_K)
      .def("__repr__", [](const ScalingParams& s) {
        return "ScalingParams(K=" + std::to_string(s.K) + ", delta_K=" +
               std::to_string(s.delta_K) + ", h_K=" + std::to_string(s.h_K) + ")";
      });

  m.def(
      "make_scaling",
      [](double K, double exponent) { return make_scaling(K, DeltaRule::power_law(exponent)); },
      py::arg("K"), py::arg("exponent") = 2.0,
      "Scaling with the power-law grid delta_K = (log K)^-exponent");
  m.def(
      "make_scaling_step",
      [](double K, double step) { return make_scaling(K, DeltaRule::explicit_step(step)); },
      py::arg("K"), py::arg("step"), "Scaling with an explicitly chosen grid step");

  py::class_<TraitWindow>(m, "TraitWindow")
      .def_readonly("x_min", &TraitWindow::x_min)
      .def_readonly("x_max", &TraitWindow::x_max)
      .def_readonly("i_min", &TraitWindow::i_min)
      .def_readonly("i_max", &TraitWindow::i_max)
      .def_readonly("step", &TraitWindow::step)
      .def("size", &TraitWindow::size)
      .def("node", &TraitWindow::node, py::arg("i"))
      .def("lo", &TraitWindow::lo)
      .def("hi", &TraitWindow::hi);

  m.def("make_window", &make_window, py::arg("x_min"), py::arg("x_max"), py::arg("step"),
        "Lattice window covering [x_min, x_max] with the given step");

  py::class_<LatticeField>(m, "LatticeField")
      .def_readonly("window", &LatticeField::window)
      .def_property_readonly("space",
                             [](const LatticeField& f) { return to_string(f.space); })
      .def_readwrite("values", &LatticeField::values)
      .def("at", [](const LatticeField& f, std::int64_t i) { return f.values.at(i - f.window.i_min); },
           py::arg("i"));

  m.def(
      "interpolate", [](const LatticeField& f, double x) { return interpolate(f, x); },
      py::arg("field"), py::arg("x"), "Piecewise-linear evaluation inside the node range");
  m.def("max_discrete_slope", &max_discrete_slope, py::arg("field"),
        "Largest |f(i+1)-f(i)| / step over the window");

  py::class_<Trajectory>(m, "Trajectory")
      .def_property_readonly("space", [](const Trajectory& t) { return to_string(t.space); })
      .def_readonly("scaling", &Trajectory::scaling)
      .def_readonly("times", &Trajectory::times)
      .def_readonly("fields", &Trajectory::fields)
      .def_readonly("max_slopes", &Trajectory::max_slopes)
      .def_readonly("tail_bound", &Trajectory::tail_bound);

  m.def("field_at_time", &field_at_time, py::arg("trajectory"), py::arg("t"),
        "Stored field at t, linearly interpolated in time between outputs");

  py::class_<MomentResult>(m, "MomentResult")
      .def_readonly("value", &MomentResult::value)
      .def_readonly("tail_bound", &MomentResult::tail_bound)
      .def_readonly("truncation_M", &MomentResult::truncation_M)
      .def("__repr__", [](const MomentResult& r) {
        return "MomentResult(value=" + std::to_string(r.value) + ", tail_bound=" +
               std::to_string(r.tail_bound) + ")";
      });

  py::class_<KernelSpec>(m, "KernelSpec")
      .def(py::init<std::function<double(double)>, double, double, std::string>(),
           py::arg("profile"), py::arg("f_min"), py::arg("f_max"), py::arg("name") = "user")
      .def_static("exponential", &KernelSpec::exponential)
      .def_static("cosine", &KernelSpec::cosine, py::arg("beta") = 0.5)
      .def("profile", &KernelSpec::profile, py::arg("y"))
      .def("density", &KernelSpec::density, py::arg("y"))
      .def_property_readonly("f_min", &KernelSpec::f_min)
      .def_property_readonly("f_max", &KernelSpec::f_max)
      .def_property_readonly("has_closed_forms", &KernelSpec::has_closed_forms)
      .def_property_readonly("name", &KernelSpec::name);

  m.def(
      "exp_moment", [](const KernelSpec& k, double a) { return exp_moment(k, a); },
      py::arg("kernel"), py::arg("a"), "integral G(y) e^{a y} dy with a certified tail bound");
  m.def(
      "abs_exp_moment", [](const KernelSpec& k, double a) { return abs_exp_moment(k, a); },
      py::arg("kernel"), py::arg("a"));
  m.def(
      "abs_first_moment", [](const KernelSpec& k, double a) { return abs_first_moment(k, a); },
      py::arg("kernel"), py::arg("a"));
  m.def(
      "exp_moment_derivative",
      [](const KernelSpec& k, double q) { return exp_moment_derivative(k, q); },
      py::arg("kernel"), py::arg("q"));
  m.def("discrete_exp_sum", &discrete_exp_sum, py::arg("kernel"), py::arg("h"), py::arg("a"),
        py::arg("M"), "h * sum over |l h| <= M of G(l h) e^{a l h}");
  m.def("truncation_M_for", &truncation_M_for, py::arg("kernel"), py::arg("a"), py::arg("h"),
        py::arg("tol"));
  m.def("alpha_bound", &alpha_bound, py::arg("kernel"), py::arg("a"),
        "Certified upper bound for the discrete kernel sums at slope a");

  py::class_<BoundedFunction>(m, "BoundedFunction")
      .def_static("constant", &BoundedFunction::constant, py::arg("value"))
      .def_static("rational_bump", &BoundedFunction::rational_bump, py::arg("amp"),
                  py::arg("center") = 0.0, py::arg("width") = 1.0, py::arg("base") = 0.0)
      .def_static("sinusoidal", &BoundedFunction::sinusoidal, py::arg("offset"), py::arg("amp"),
                  py::arg("freq") = 1.0)
      .def_readonly("lower", &BoundedFunction::lower)
      .def_readonly("upper", &BoundedFunction::upper)
      .def_readonly("lip", &BoundedFunction::lip)
      .def_readonly("family", &BoundedFunction::family)
      .def("__call__", [](const BoundedFunction& f, double x) { return f(x); });

  py::class_<RateSpec>(m, "RateSpec")
      .def(py::init<BoundedFunction, BoundedFunction>(), py::arg("R"), py::arg("p"))
      .def_readonly("R", &RateSpec::R)
      .def_readonly("p", &RateSpec::p);

  m.def("default_rates", &default_rates);

  py::class_<InitialDataSpec>(m, "InitialDataSpec")
      .def_static("cone", &InitialDataSpec::cone, py::arg("height"), py::arg("slope"),
                  py::arg("center") = 0.0)
      .def_static("smoothed_cone", &InitialDataSpec::smoothed_cone, py::arg("height"),
                  py::arg("slope"), py::arg("center") = 0.0, py::arg("eps") = 0.1)
      .def_static("two_cones", &InitialDataSpec::two_cones, py::arg("height1"), py::arg("slope1"),
                  py::arg("center1"), py::arg("height2"), py::arg("slope2"), py::arg("center2"))
      .def_static("flat", &InitialDataSpec::flat, py::arg("level"))
      .def_readonly("A", &InitialDataSpec::A)
      .def_readonly("B1", &InitialDataSpec::B1)
      .def_readonly("L", &InitialDataSpec::L)
      .def_readonly("family", &InitialDataSpec::family)
      .def("__call__", [](const InitialDataSpec& f, double x) { return f.u0(x); });

  m.def("validate_initial", &validate_initial, py::arg("initial"), py::arg("scaling"),
        py::arg("window"));
  m.def("sample_initial", &sample_initial, py::arg("initial"), py::arg("window"));

  py::class_<IntegratorConfig>(m, "IntegratorConfig")
      .def(py::init<>())
      .def_property(
          "method", [](const IntegratorConfig& c) { return method_to_string(c.method); },
          [](IntegratorConfig& c, const std::string& s) { c.method = method_from_string(s); })
      .def_readwrite("dt_init", &IntegratorConfig::dt_init)
      .def_readwrite("dt_max", &IntegratorConfig::dt_max)
      .def_readwrite("rel_tol", &IntegratorConfig::rel_tol)
      .def_readwrite("abs_tol", &IntegratorConfig::abs_tol)
      .def_readwrite("truncation_M", &IntegratorConfig::truncation_M)
      .def_readwrite("tail_tol", &IntegratorConfig::tail_tol)
      .def_property(
          "boundary", [](const IntegratorConfig& c) { return boundary_to_string(c.boundary); },
          [](IntegratorConfig& c, const std::string& s) { c.boundary = boundary_from_string(s); })
      .def_readwrite("boundary_slope", &IntegratorConfig::boundary_slope)
      .def_readwrite("mutation_enabled", &IntegratorConfig::mutation_enabled)
      .def_readwrite("use_fft", &IntegratorConfig::use_fft);

  m.def("simulate", &simulate, py::arg("initial"), py::arg("T"), py::arg("scaling"),
        py::arg("rates"), py::arg("kernel"), py::arg("config") = IntegratorConfig{},
        py::arg("output_times") = std::vector<double>{},
        "Integrate the lattice model from the initial field (u or n space)");
  m.def(
      "rhs_u",
      [](const LatticeField& f, const ScalingParams& s, const RateSpec& r, const KernelSpec& k,
         const IntegratorConfig& c) { return rhs_u(f, s, r, k, c); },
      py::arg("field"), py::arg("scaling"), py::arg("rates"), py::arg("kernel"),
      py::arg("config") = IntegratorConfig{});
  m.def(
      "rhs_n",
      [](const LatticeField& f, const ScalingParams& s, const RateSpec& r, const KernelSpec& k,
         const IntegratorConfig& c) { return rhs_n(f, s, r, k, c); },
      py::arg("field"), py::arg("scaling"), py::arg("rates"), py::arg("kernel"),
      py::arg("config") = IntegratorConfig{});

  m.def(
      "hopf_cole",
      [](const LatticeField& f, const ScalingParams& s, const std::string& dir) {
        if (dir == "to_u") return hopf_cole(f, s, HopfCole::to_u);
        if (dir == "to_n") return hopf_cole(f, s, HopfCole::to_n);
        throw std::invalid_argument("direction must be to_u or to_n");
      },
      py::arg("field"), py::arg("scaling"), py::arg("direction"),
      "u = log(n)/log K  or  n = K^u, node-wise");
  m.def("mass_norm", &mass_norm, py::arg("field"), "step-weighted l1 norm");

  py::class_<HJGridConfig>(m, "HJGridConfig")
      .def(py::init<>())
      .def_readwrite("x_min", &HJGridConfig::x_min)
      .def_readwrite("x_max", &HJGridConfig::x_max)
      .def_readwrite("dx", &HJGridConfig::dx)
      .def_readwrite("dt", &HJGridConfig::dt)
      .def_readwrite("epsilon_clamp", &HJGridConfig::epsilon_clamp)
      .def_readwrite("viscosity_theta", &HJGridConfig::viscosity_theta)
      .def_property(
          "scheme", [](const HJGridConfig& c) { return to_string(c.scheme); },
          [](HJGridConfig& c, const std::string& s) { c.scheme = hj_scheme_from_string(s); });

  py::class_<HamiltonianEval>(m, "HamiltonianEval")
      .def_readonly("x", &HamiltonianEval::x)
      .def_readonly("q", &HamiltonianEval::q)
      .def_readonly("value", &HamiltonianEval::value)
      .def_readonly("finite", &HamiltonianEval::finite);

  m.def("hamiltonian_source", &hamiltonian_source, py::arg("rates"), py::arg("kernel"),
        py::arg("x"), py::arg("q"), "H(x, q) = R(x) + p(x) integral G e^{q y} dy");
  m.def("lipschitz_envelope", &lipschitz_envelope, py::arg("field"), py::arg("slope") = 1.0,
        "Largest slope-Lipschitz minorant on the grid");
  m.def("solve_hj", &solve_hj, py::arg("initial"), py::arg("T"), py::arg("rates"),
        py::arg("kernel"), py::arg("grid") = HJGridConfig{},
        py::arg("output_times") = std::vector<double>{},
        "Monotone solver for the constrained limit equation");
  m.def("inf_convolution_time", &inf_convolution_time, py::arg("trajectory"), py::arg("t"),
        py::arg("gamma"), "min over s of [u(s, x) + (t-s)^2 / gamma^2]");

  py::class_<CheckReport>(m, "CheckReport")
      .def_readonly("check_id", &CheckReport::check_id)
      .def_readonly("passed", &CheckReport::passed)
      .def_readonly("worst_margin", &CheckReport::worst_margin)
      .def_readonly("worst_location", &CheckReport::worst_location)
      .def_readonly("tolerance", &CheckReport::tolerance)
      .def("__repr__", [](const CheckReport& r) {
        return "CheckReport(" + r.check_id + (r.passed ? ", pass" : ", FAIL") + ", margin=" +
               std::to_string(r.worst_margin) + ")";
      });

  m.def("sup_error", &sup_error, py::arg("a"), py::arg("b"), py::arg("x_lo"), py::arg("x_hi"),
        py::arg("times") = std::vector<double>{});
  m.def("check_mass_bound", &check_mass_bound, py::arg("n_trajectory"), py::arg("rates"),
        py::arg("kernel"), py::arg("slack") = 1e-6);
  m.def("check_positivity", &check_positivity, py::arg("n_trajectory"), py::arg("slack") = 1e-9);
  m.def("check_comparison", &check_comparison, py::arg("lower"), py::arg("upper"),
        py::arg("rel_slack") = 1e-12);
  m.def("check_sandwich", &check_sandwich, py::arg("u_trajectory"), py::arg("rates"),
        py::arg("kernel"), py::arg("slack") = 1e-6);
  m.def("check_lipschitz", &check_lipschitz, py::arg("trajectory"), py::arg("cap"));

  py::class_<ConvergenceRecord>(m, "ConvergenceRecord")
      .def_readonly("K", &ConvergenceRecord::K)
      .def_readonly("log_K", &ConvergenceRecord::log_K)
      .def_readonly("delta_K", &ConvergenceRecord::delta_K)
      .def_readonly("h_K", &ConvergenceRecord::h_K)
      .def_readonly("sup_error", &ConvergenceRecord::sup_error)
      .def_readonly("max_slope", &ConvergenceRecord::max_slope)
      .def_readonly("runtime_seconds", &ConvergenceRecord::runtime_seconds);

  py::class_<SweepConfig>(m, "SweepConfig")
      .def(py::init<>())
      .def_readwrite("K_list", &SweepConfig::K_list)
      .def_readwrite("x_min", &SweepConfig::x_min)
      .def_readwrite("x_max", &SweepConfig::x_max)
      .def_readwrite("obs_min", &SweepConfig::obs_min)
      .def_readwrite("obs_max", &SweepConfig::obs_max)
      .def_readwrite("T", &SweepConfig::T)
      .def_readwrite("output_times", &SweepConfig::output_times)
      .def_readwrite("integrator", &SweepConfig::integrator)
      .def_readwrite("reference", &SweepConfig::reference)
      .def_readwrite("timing", &SweepConfig::timing);

  m.def(
      "convergence_sweep",
      [](const InitialDataSpec& init, const RateSpec& rates, const KernelSpec& kernel,
         const SweepConfig& sweep) { return convergence_sweep(init, rates, kernel, sweep); },
      py::arg("initial"), py::arg("rates"), py::arg("kernel"), py::arg("sweep"),
      "One lattice run per K against a shared limit reference");
  m.def("observed_order", &observed_order, py::arg("hs"), py::arg("errs"),
        "Least-squares slope of log(err) vs log(h)");

  py::class_<RandomScenario>(m, "RandomScenario")
      .def_readonly("kernel", &RandomScenario::kernel)
      .def_readonly("rates", &RandomScenario::rates)
      .def_readonly("initial", &RandomScenario::initial);

  m.def("random_scenarios", &random_scenarios, py::arg("seed"), py::arg("count"),
        "Deterministic scenario battery used by the verification command");

  m.def("write_trajectory_csv", &write_trajectory_csv, py::arg("path"), py::arg("trajectory"));
  m.def("read_trajectory_csv", &read_trajectory_csv, py::arg("path"));
  m.def("write_reports_json", &write_reports_json, py::arg("path"), py::arg("reports"));

  py::register_exception<SlopeBlowupError>(m, "SlopeBlowupError", PyExc_RuntimeError);
  py::register_exception<IntegrationError>(m, "IntegrationError", PyExc_RuntimeError);
}
