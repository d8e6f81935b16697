import numpy as np
import pytest
from scipy.integrate import solve_ivp

from qudit_reservoir.errors import DivergenceError
from qudit_reservoir.ode import integrate


def test_exponential_decay_matches_closed_form():
    lam = -3.0 + 2.0j
    sol = integrate(lambda t, y: lam * y, np.array([1.0 + 0j]), 2.0, rtol=1e-10, atol=1e-12)
    assert sol.status == "max_time"
    assert sol.t == pytest.approx(2.0)
    assert abs(sol.y[0] - np.exp(lam * 2.0)) < 1e-9


def test_matches_scipy_on_nonlinear_system():
    def f(t, y):
        return np.array([y[1], -np.sin(y[0]) - 0.1 * y[1]])

    y0 = np.array([1.0, 0.0])
    ours = integrate(f, y0, 5.0, rtol=1e-10, atol=1e-12)
    ref = solve_ivp(f, (0, 5.0), y0, method="DOP853", rtol=1e-12, atol=1e-14)
    assert np.max(np.abs(ours.y - ref.y[:, -1])) < 1e-8


def test_matrix_state_and_callback_stop():
    a = -np.diag([1.0, 2.0])
    seen = []

    def cb(t, y):
        seen.append(t)
        return np.max(np.abs(y)) < 0.5

    sol = integrate(lambda t, y: a @ y, np.eye(2, dtype=complex), 10.0, callback=cb)
    assert sol.status == "stopped"
    assert np.max(np.abs(sol.y)) < 0.5
    assert seen == sorted(seen) and seen[0] == 0.0


def test_max_steps():
    sol = integrate(lambda t, y: -y, np.ones(1), 100.0, max_steps=3)
    assert sol.status == "max_steps" and sol.steps == 3


def test_divergence_raises():
    with pytest.raises(DivergenceError):
        integrate(lambda t, y: y**2, np.ones(1), 5.0, rtol=1e-3)
