"""Adaptive Dormand-Prince 5(4) integrator for array-valued ODEs.

Works on arrays of any shape and on complex states. The step is controlled
by the embedded 4th-order error estimate with a mixed absolute/relative
RMS norm.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from typing import Callable, Optional

import numpy as np

from .errors import DivergenceError

# Butcher tableau (Dormand & Prince 1980)
_C = np.array([0.0, 1 / 5, 3 / 10, 4 / 5, 8 / 9, 1.0, 1.0])
_A = [
    [],
    [1 / 5],
    [3 / 40, 9 / 40],
    [44 / 45, -56 / 15, 32 / 9],
    [19372 / 6561, -25360 / 2187, 64448 / 6561, -212 / 729],
    [9017 / 3168, -355 / 33, 46732 / 5247, 49 / 176, -5103 / 18656],
    [35 / 384, 0.0, 500 / 1113, 125 / 192, -2187 / 6784, 11 / 84],
]
_B5 = np.array([35 / 384, 0.0, 500 / 1113, 125 / 192, -2187 / 6784, 11 / 84, 0.0])
_B4 = np.array([5179 / 57600, 0.0, 7571 / 16695, 393 / 640, -92097 / 339200, 187 / 2100, 1 / 40])
_E = _B5 - _B4

SAFETY = 0.9
MIN_FACTOR = 0.2
MAX_FACTOR = 5.0


@dataclass
class OdeSolution:
    t: float
    y: np.ndarray
    steps: int
    rejected: int
    status: str  # "stopped", "max_time" or "max_steps"
    ts: list = field(default_factory=list)


def _rms(x: np.ndarray) -> float:
    return float(np.sqrt(np.mean(np.abs(x) ** 2)))


def _initial_step(f, t0, y0, f0, rtol, atol) -> float:
    scale = atol + rtol * np.abs(y0)
    d0, d1 = _rms(y0 / scale), _rms(f0 / scale)
    h0 = 1e-6 if d0 < 1e-5 or d1 < 1e-5 else 0.01 * d0 / d1
    y1 = y0 + h0 * f0
    d2 = _rms((f(t0 + h0, y1) - f0) / scale) / h0
    if max(d1, d2) <= 1e-15:
        h1 = max(1e-6, h0 * 1e-3)
    else:
        h1 = (0.01 / max(d1, d2)) ** (1 / 5)
    return min(100 * h0, h1)


def integrate(
    f: Callable[[float, np.ndarray], np.ndarray],
    y0: np.ndarray,
    t_max: float,
    rtol: float = 1e-6,
    atol: float = 1e-9,
    max_steps: int = 100_000,
    callback: Optional[Callable[[float, np.ndarray], bool]] = None,
    h0: Optional[float] = None,
) -> OdeSolution:
    """Integrate ``dy/dt = f(t, y)`` from ``t = 0``.

    ``callback(t, y)`` is invoked on the initial state and after every accepted
    step; returning True stops the integration.
    """
    t = 0.0
    y = np.array(y0, copy=True)
    k1 = f(t, y)
    ts = [t]
    if callback is not None and callback(t, y):
        return OdeSolution(t, y, 0, 0, "stopped", ts)
    h = h0 if h0 is not None else _initial_step(f, t, y, k1, rtol, atol)
    h = min(h, t_max)
    steps = rejected = 0
    while t < t_max:
        if steps >= max_steps:
            return OdeSolution(t, y, steps, rejected, "max_steps", ts)
        h = min(h, t_max - t)
        ks = [k1]
        for i in range(1, 7):
            yi = y + h * sum(a * k for a, k in zip(_A[i], ks))
            ks.append(f(t + _C[i] * h, yi))
        y_new = yi  # stage 7 is evaluated at the 5th-order solution (FSAL)
        err_vec = h * sum(e * k for e, k in zip(_E, ks) if e != 0.0)
        if not np.all(np.isfinite(y_new)):
            raise DivergenceError(f"non-finite state at t={t + h:.6g}")
        scale = atol + rtol * np.maximum(np.abs(y), np.abs(y_new))
        err = _rms(err_vec / scale)
        if err <= 1.0:
            t += h
            y = y_new
            k1 = ks[6]
            steps += 1
            ts.append(t)
            if callback is not None and callback(t, y):
                return OdeSolution(t, y, steps, rejected, "stopped", ts)
            factor = MAX_FACTOR if err == 0 else min(MAX_FACTOR, SAFETY * err ** -0.2)
        else:
            rejected += 1
            factor = max(MIN_FACTOR, SAFETY * err ** -0.2)
        h *= factor
        if h < 1e-14 * max(1.0, abs(t)):
            raise DivergenceError(f"step size underflow at t={t:.6g}")
    return OdeSolution(t, y, steps, rejected, "max_time", ts)
