import math

import numpy as np
import pytest
from scipy.optimize import brentq

from slbohm import PhysicalParams, Potential
from slbohm.analytics import center_noise_variance
from slbohm.dynamics import (
    IntegrationError,
    analytic_center,
    integrate_langevin,
    integrate_pinney,
    width_path,
)
from slbohm.noise import NoiseStream

POTENTIALS = [
    Potential.free(),
    Potential.linear(0.05),
    Potential.repeller(0.3),
    Potential.repeller(0.3, g=0.05),
    Potential.harmonic(0.3),
    Potential.harmonic(2.0),
]


def test_free_center_closed_form():
    p = PhysicalParams(gamma=0.2)
    path = integrate_langevin(p, Potential.free(), 0.0, 1.0, None, 0.001, 5.0)
    assert path.q[0, -1] == pytest.approx((1 - math.exp(-1)) / 0.2, abs=1e-6)


def test_falling_ground_time():
    p = PhysicalParams(gamma=0.2)
    path = integrate_langevin(p, Potential.linear(0.05), 10.0, 0.0, None, 0.01, 60.0)
    q = path.q[0]
    i = int(np.flatnonzero(q <= 0)[0])
    t_hit = path.t[i - 1] + q[i - 1] / (q[i - 1] - q[i]) * (path.t[i] - path.t[i - 1])
    root = brentq(lambda t: 0.2 * t + math.exp(-0.2 * t) - 9.0, 1, 100)
    assert root == pytest.approx(45.0, abs=0.1)
    assert t_hit == pytest.approx(root, abs=0.01)


def test_initial_condition():
    p = PhysicalParams(gamma=0.1)
    path = integrate_langevin(p, Potential.repeller(0.1), -20.0, 0.0, None, 0.01, 1.0)
    assert path.q[0, 0] == -20.0
    q, v = analytic_center(p, Potential.repeller(0.1), -20.0, 0.3, 0.0)
    assert (q, v) == (-20.0, 0.3)


def test_repeller_frictionless_kinematics():
    p = PhysicalParams()
    t = np.linspace(0, 10, 11)
    q, _ = analytic_center(p, Potential.repeller(0.2), -3.0, 0.5, t)
    np.testing.assert_allclose(q, -3.0 * np.cosh(0.2 * t) + 0.5 / 0.2 * np.sinh(0.2 * t), rtol=1e-12)


def test_free_terminal_position():
    q, _ = analytic_center(PhysicalParams(gamma=0.2), Potential.free(), 0.0, 1.0, 400.0)
    assert q == pytest.approx(5.0, rel=1e-12)


@pytest.mark.parametrize("pot", POTENTIALS, ids=lambda p: f"{p.kind.value}-{p.omega}-{p.g}")
@pytest.mark.parametrize("gamma", [0.0, 0.1, 0.5])
def test_zero_noise_second_order(pot, gamma):
    p = PhysicalParams(gamma=gamma)
    t_end = 4.0
    q_exact, _ = analytic_center(p, pot, 1.0, 0.5, t_end)
    errs = []
    for dt in (0.04, 0.02, 0.01):
        path = integrate_langevin(p, pot, 1.0, 0.5, None, dt, t_end)
        errs.append(abs(path.q[0, -1] - q_exact))
    assert errs[-1] < 1e-3
    if errs[0] < 1e-11:
        # constant force without friction: velocity Verlet is exact
        return
    for r in (errs[0] / errs[1], errs[1] / errs[2]):
        assert 3.0 < r < 5.5


def test_limits_stable():
    # small gamma and omega go through series forms, not cancellation
    t = np.array([1e-3, 1.0, 50.0])
    for g in (1e-9, 1e-5):
        a, _ = analytic_center(PhysicalParams(gamma=g), Potential.free(), 0.0, 1.0, t)
        np.testing.assert_allclose(a, -np.expm1(-g * t) / g, rtol=1e-12)
    a, _ = analytic_center(PhysicalParams(), Potential.repeller(1e-7), 2.0, 1.0, t)
    np.testing.assert_allclose(a, 2.0 + t, rtol=1e-6)


def test_noise_mean_and_variance():
    p = PhysicalParams(gamma=0.2, kT=0.5, kTs=0.0)
    n = 10000
    streams = [NoiseStream.for_params(p, 31, i, 0.02) for i in range(n)]
    path = integrate_langevin(p, Potential.free(), np.zeros(n), 0.0, streams, 0.02, 20.0, record_every=50)
    mean = path.q.mean(axis=0)
    se = path.q.std(axis=0, ddof=1) / math.sqrt(n)
    assert np.all(np.abs(mean) <= 3 * se + 1e-12)
    var = path.q.var(axis=0, ddof=1)
    target, _ = center_noise_variance(p, Potential.free(), path.t)
    var_se = np.sqrt(2.0 / (n - 1)) * target
    assert np.all(np.abs(var - target)[1:] <= 3 * var_se[1:])


def test_euler_scheme_first_order():
    p = PhysicalParams(gamma=0.5)
    pot = Potential.harmonic(0.5)
    exact, _ = analytic_center(p, pot, 1.0, 0.0, 4.0)
    e1 = abs(integrate_langevin(p, pot, 1.0, 0.0, None, 0.02, 4.0, scheme="euler").q[0, -1] - exact)
    e2 = abs(integrate_langevin(p, pot, 1.0, 0.0, None, 0.01, 4.0, scheme="euler").q[0, -1] - exact)
    assert 1.6 < e1 / e2 < 2.5


def test_blow_up_is_reported():
    p = PhysicalParams()
    with pytest.raises(IntegrationError, match="step"):
        integrate_langevin(p, Potential.repeller(50.0), 1.0, 0.0, None, 0.01, 100.0)


def test_pinney_free_closed_form():
    w = integrate_pinney(PhysicalParams(), Potential.free(), 1.0, 0.001, 2.0)
    assert w.sigma[0] == 1.0
    assert w.sigma[-1] == pytest.approx(math.sqrt(2.0), abs=1e-8)


def test_pinney_long_time_quarter_power():
    w = width_path(PhysicalParams(gamma=0.2), Potential.free(), 1.0, 800.0)
    assert w(800.0) / w(400.0) == pytest.approx(2**0.25, rel=0.02)


def test_pinney_free_monotone_bounded():
    for g in (0.05, 0.2, 1.0):
        w = integrate_pinney(PhysicalParams(gamma=g), Potential.free(), 1.0, 0.01, 50.0)
        assert np.all(np.diff(w.sigma) >= -1e-14)
        assert np.all(w.sigma >= 1.0)


def test_pinney_classical_constant_free():
    w = integrate_pinney(PhysicalParams(gamma=0.2), Potential.free(), 1.0, 0.01, 10.0, classical=True)
    assert np.all(w.sigma == 1.0)


def test_pinney_repeller_frictionless():
    w = 0.3
    path = integrate_pinney(PhysicalParams(), Potential.repeller(w), 1.0, 0.001, 5.0)
    t = path.t
    exact = np.sqrt(np.cosh(w * t) ** 2 + 0.25 * np.sinh(w * t) ** 2 / w**2)
    np.testing.assert_allclose(path.sigma, exact, rtol=1e-9)


def test_width_path_interpolates_and_rejects_outside():
    w = width_path(PhysicalParams(), Potential.free(), 1.0, 2.0)
    assert w(1.0) == pytest.approx(math.sqrt(1.25), abs=1e-9)
    with pytest.raises(ValueError):
        w(3.0)
