import math

import numpy as np
import pytest

import sps_lab


def test_version():
    assert sps_lab.__version__ == "0.3.0"


def test_quadrature():
    g = sps_lab.RadialGrid(4096, 40.0)
    u = sps_lab.RadialFunction(g, np.exp(-2 * g.nodes))
    assert sps_lab.integrate(u) == pytest.approx(math.pi, rel=1e-8)


def test_functionals():
    bd = sps_lab.EnergyBreakdown(1, 1, 2, 2.4, 4)
    assert sps_lab.energy(bd, 1) == pytest.approx(0.9)
    assert sps_lab.fiber_project(bd, 1) == pytest.approx(1.070280, abs=1e-6)
    assert sps_lab.eps_of_lambda(4, 4) == pytest.approx(0.5)
    with pytest.raises(ValueError):
        sps_lab.breakdown(sps_lab.RadialFunction(sps_lab.RadialGrid(64, 10.0), np.zeros(64)), 7)


def test_ground_state():
    sol = sps_lab.ground_state(sps_lab.ProblemParams.from_eps(4, 1), sps_lab.SolverConfig(n=2001))
    assert sol.converged
    assert all(v < 1e-6 for v in sol.residuals.values())
    u = sol.u.values
    assert u.shape == (2001,)
    assert np.all(np.diff(u) < 0)
    assert sps_lab.verify(sol)["passed"]


def test_solver_error():
    with pytest.raises(sps_lab.SolverError):
        sps_lab.ground_state(sps_lab.ProblemParams.from_eps(4, 1), sps_lab.SolverConfig(n=2001, max_iters=2))


def test_cli(tmp_path):
    out = tmp_path / "s.json"
    code, stdout, _ = sps_lab.run_cli(["solve", "--p", "4", "--lambda", "4", "--grid-n", "2001", "--out", str(out)])
    assert code == 0
    assert "eps = 0.5" in stdout
    sol = sps_lab.Solution.load(str(out))
    assert sol.params.eps == pytest.approx(0.5)
    assert sps_lab.run_cli(["solve", "--p", "2.5", "--eps", "1"])[0] == 1
