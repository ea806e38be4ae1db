"""End-to-end smoke tests of the Python bindings (small, fast cases only)."""

import math
import os
import subprocess
import sys

import pytest

import selmut


def test_scaling_values():
    s = selmut.make_scaling(1.0e4)
    assert s.log_K == pytest.approx(math.log(1.0e4), rel=0, abs=0)
    assert s.delta_K == pytest.approx(1.0 / math.log(1.0e4) ** 2, rel=1e-15)
    assert s.h_K == pytest.approx(1.0 / math.log(1.0e4), rel=1e-15)
    assert 0.0 < s.h_K < 1.0

    t = selmut.make_scaling_step(1.0e3, 0.01)
    assert t.delta_K == 0.01
    assert t.h_K == pytest.approx(0.01 * math.log(1.0e3), rel=1e-15)


def test_kernel_moments():
    k = selmut.KernelSpec.exponential()
    m = selmut.exp_moment(k, 0.5)
    # integral of (1/2) e^{-|y|} e^{y/2} dy = 1 / (1 - 1/4)
    assert m.value == pytest.approx(1.0 / 0.75, rel=1e-10)
    assert m.value + m.tail_bound >= 1.0 / 0.75

    alpha0 = selmut.alpha_bound(k, 0.0)
    assert 1.0 <= alpha0 <= 1.2

    s = selmut.discrete_exp_sum(k, 1.0, 0.0, 40.0)
    assert s.value == pytest.approx(1.0819767068693265, rel=1e-12)


def test_simulate_and_hopf_cole_round_trip():
    scaling = selmut.make_scaling(1.0e2)
    window = selmut.make_window(-2.0, 2.0, scaling.delta_K)
    init = selmut.InitialDataSpec.cone(0.0, 0.5)
    u0 = selmut.sample_initial(init, window)

    n0 = selmut.hopf_cole(u0, scaling, "to_n")
    back = selmut.hopf_cole(n0, scaling, "to_u")
    assert max(abs(a - b) for a, b in zip(back.values, u0.values)) < 1e-12

    rates = selmut.default_rates()
    kernel = selmut.KernelSpec.exponential()
    traj = selmut.simulate(u0, 0.2, scaling, rates, kernel)
    assert traj.space == "u"
    assert traj.times[0] == 0.0 and traj.times[-1] == pytest.approx(0.2)
    assert all(s < 1.0 for s in traj.max_slopes)
    assert traj.tail_bound <= 1e-7


def test_solve_hj_is_lipschitz():
    rates = selmut.default_rates()
    kernel = selmut.KernelSpec.exponential()
    grid = selmut.HJGridConfig()
    grid.x_min, grid.x_max, grid.dx = -2.0, 2.0, 0.05
    init = selmut.InitialDataSpec.cone(0.0, 0.5)
    traj = selmut.solve_hj(init, 0.5, rates, kernel, grid)
    assert traj.space == "hj"
    for f in traj.fields:
        assert selmut.max_discrete_slope(f) <= 1.0 + 1e-12
    # the source term is positive here, so the solution grows
    assert traj.fields[-1].values[len(traj.fields[-1].values) // 2] > init(0.0)


def test_checks_report_shape():
    rates = selmut.default_rates()
    kernel = selmut.KernelSpec.exponential()
    scaling = selmut.make_scaling(1.0e2)
    window = selmut.make_window(-2.0, 2.0, scaling.delta_K)
    u0 = selmut.sample_initial(selmut.InitialDataSpec.cone(0.0, 0.5), window)
    traj = selmut.simulate(u0, 0.2, scaling, rates, kernel)

    rep = selmut.check_lipschitz(traj, 1.5)
    assert rep.check_id == "lipschitz"
    assert rep.passed and rep.worst_margin <= rep.tolerance
    assert isinstance(rep.worst_location, dict)

    sandwich = selmut.check_sandwich(traj, rates, kernel)
    assert sandwich.passed


def test_trajectory_csv_round_trip(tmp_path):
    scaling = selmut.make_scaling(1.0e2)
    window = selmut.make_window(-1.0, 1.0, scaling.delta_K)
    u0 = selmut.sample_initial(selmut.InitialDataSpec.cone(0.0, 0.4), window)
    traj = selmut.simulate(u0, 0.1, scaling, selmut.default_rates(),
                           selmut.KernelSpec.exponential())
    path = str(tmp_path / "run.csv")
    selmut.write_trajectory_csv(path, traj)
    back = selmut.read_trajectory_csv(path)
    assert back.space == "u"
    assert back.times == pytest.approx(traj.times)
    assert back.fields[-1].values == pytest.approx(traj.fields[-1].values)


def test_cli_help_runs():
    cli = os.environ.get("SELMUT_CLI")
    if not cli:
        pytest.skip("SELMUT_CLI not set")
    out = subprocess.run([cli, "--help"], capture_output=True, text=True)
    assert out.returncode == 0
    for sub in ("simulate-discrete", "solve-hj", "verify", "converge"):
        assert sub in out.stdout
