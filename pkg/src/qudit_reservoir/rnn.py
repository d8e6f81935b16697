"""Gate design with a known reservoir: recurrent-network gradient flow.

The input operator is found as the steady state of

    dW/dt = -mu * U^dagger F[G(W)],   f_ij = g_ij,

where the hidden-layer matrix G is either the projected residual
``P U W - [X | 0]`` or the unitary residual ``U W - T``. The flow is the
gradient flow of ``sum |g_ij|^2`` with respect to ``conj(W)``.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from typing import Literal

import numpy as np

from .errors import DivergenceError, InvalidConfigError, InvalidDimensionError, InvalidModeError, ValidationError
from .gates import TargetEmbedding, projector
from .linalg import RandomSource, as_matrix, complex_gaussian, unitarity_defect
from .ode import integrate


@dataclass(frozen=True)
class RnnProblem:
    reservoir: np.ndarray
    embedding: TargetEmbedding
    learning_rate: float = 100.0

    def __post_init__(self):
        u = as_matrix(self.reservoir, "reservoir")
        if u.shape != (self.embedding.m, self.embedding.m):
            raise InvalidDimensionError(
                f"reservoir shape {u.shape} does not match embedding dimension {self.embedding.m}"
            )
        defect = unitarity_defect(u)
        if defect > 1e-10:
            raise ValidationError(f"reservoir is not unitary (defect {defect:.3g})", "reservoir")
        if not self.learning_rate > 0:
            raise InvalidConfigError("learning rate must be positive")
        object.__setattr__(self, "reservoir", u)

    @property
    def m(self) -> int:
        return self.embedding.m


@dataclass(frozen=True)
class OdeConfig:
    max_time: float = 10.0
    rel_tol: float = 1e-6
    abs_tol: float = 1e-9
    residual_tol: float = 1e-8
    max_steps: int = 100_000
    init: Literal["zero", "random"] = "zero"
    init_seed: int = 0

    def __post_init__(self):
        if not (self.max_time > 0 and self.rel_tol > 0 and self.abs_tol > 0 and self.residual_tol > 0):
            raise InvalidConfigError("time horizon and tolerances must be positive")
        if self.max_steps < 1:
            raise InvalidConfigError("max_steps must be >= 1")
        if self.init not in ("zero", "random"):
            raise InvalidConfigError(f"init must be 'zero' or 'random', got {self.init!r}")


@dataclass
class SolveResult:
    solution: np.ndarray
    error_history: list[tuple[float, float]]
    converged: bool
    final_error: float
    unitarity_defect: float
    steps: int = 0
    extra: dict = field(default_factory=dict)


def _check_mode(target: TargetEmbedding, mode: str):
    if target.mode != mode and target.m != target.n:
        raise InvalidModeError(f"expected a {mode} embedding, got {target.mode}")


def residual_projected(u, w, target: TargetEmbedding) -> np.ndarray:
    """``P U W - [X | 0]`` (shape ``N x M``)."""
    _check_mode(target, "projected")
    n, m = target.n, target.m
    u, w = np.asarray(u, dtype=np.complex128), np.asarray(w, dtype=np.complex128)
    if u.shape != (m, m) or w.shape != (m, m):
        raise InvalidDimensionError(f"expected {m}x{m} reservoir and weights, got {u.shape}, {w.shape}")
    return (u @ w)[:n] - target.target[:n]


def residual_unitary(u, w, target: TargetEmbedding) -> np.ndarray:
    """``U W - T`` (shape ``M x M``)."""
    _check_mode(target, "unitary")
    m = target.m
    u, w = np.asarray(u, dtype=np.complex128), np.asarray(w, dtype=np.complex128)
    if u.shape != (m, m) or w.shape != (m, m):
        raise InvalidDimensionError(f"expected {m}x{m} reservoir and weights, got {u.shape}, {w.shape}")
    return u @ w - target.target


def residual(u, w, target: TargetEmbedding) -> np.ndarray:
    if target.mode == "projected":
        return residual_projected(u, w, target)
    return residual_unitary(u, w, target)


def error_functional(g) -> float:
    g = np.asarray(g)
    return float(np.sum(g.real**2 + g.imag**2))


def rnn_rhs(problem: RnnProblem, w) -> np.ndarray:
    """Right-hand side ``-mu U^dagger P^dagger G``.

    In projected mode the ``N x M`` hidden layer is lifted with ``P^dagger``
    (zero rows on the dropped channels) so that the product is ``M x M``.
    """
    w = np.asarray(w, dtype=np.complex128)
    u, emb = problem.reservoir, problem.embedding
    if w.shape != (emb.m, emb.m):
        raise InvalidDimensionError(f"state must be {emb.m}x{emb.m}, got {w.shape}")
    g = residual(u, w, emb)
    if g.shape[0] != emb.m:
        g = projector(emb.n, emb.m).T @ g
    return -problem.learning_rate * (u.conj().T @ g)


def initial_state(problem: RnnProblem, config: OdeConfig) -> np.ndarray:
    m = problem.m
    if config.init == "zero":
        return np.zeros((m, m), dtype=np.complex128)
    gen = RandomSource(config.init_seed).generator()
    return complex_gaussian(gen, (m, m)) / np.sqrt(m)


def solve(problem: RnnProblem, config: OdeConfig = OdeConfig()) -> SolveResult:
    """Integrate the flow until the error functional drops below ``residual_tol``."""
    u, emb = problem.reservoir, problem.embedding
    history: list[tuple[float, float]] = []

    def record(t, w):
        e = error_functional(residual(u, w, emb))
        if not np.isfinite(e):
            last = history[-1][1] if history else float("nan")
            raise DivergenceError(f"error functional became non-finite at t={t:.6g}", last)
        history.append((float(t), e))
        return e <= config.residual_tol

    try:
        sol = integrate(
            lambda t, w: rnn_rhs(problem, w),
            initial_state(problem, config),
            config.max_time,
            rtol=config.rel_tol,
            atol=config.abs_tol,
            max_steps=config.max_steps,
            callback=record,
        )
    except DivergenceError as exc:
        last = history[-1][1] if history else float("nan")
        raise DivergenceError(str(exc), last) from exc

    final_error = history[-1][1]
    return SolveResult(
        solution=sol.y,
        error_history=history,
        converged=final_error <= config.residual_tol,
        final_error=final_error,
        unitarity_defect=unitarity_defect(sol.y),
        steps=sol.steps,
        extra={"status": sol.status, "rejected_steps": sol.rejected},
    )
