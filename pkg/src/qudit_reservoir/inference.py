"""Gate design with an unknown reservoir, learned from labelled examples.

The reservoir only enters through forward products ``U @ W @ x``; the
trainer never inverts or inspects ``U`` directly.
"""

from __future__ import annotations

from dataclasses import dataclass, field, replace
from typing import Optional

import numpy as np

from .errors import DivergenceError, InvalidConfigError, InvalidDimensionError
from .gates import TargetEmbedding, achieved_gate
from .linalg import RandomSource, as_matrix, complex_gaussian, frobenius_distance, unitarity_defect
from .slm import ModulatorConstraint, retract

SPANS = ("all_m", "first_n")


@dataclass(frozen=True)
class Dataset:
    """Column-stacked inputs and labels: ``inputs[:, i]`` is the i-th state."""

    inputs: np.ndarray
    labels: np.ndarray
    n_train: int
    n_valid: int

    @property
    def m(self) -> int:
        return self.inputs.shape[0]

    @property
    def train(self) -> tuple[np.ndarray, np.ndarray]:
        return self.inputs[:, : self.n_train], self.labels[:, : self.n_train]

    @property
    def valid(self) -> tuple[np.ndarray, np.ndarray]:
        return self.inputs[:, self.n_train :], self.labels[:, self.n_train :]


@dataclass(frozen=True)
class TrainConfig:
    """Hyperparameters for full-batch descent.

    ``learning_rate`` is measured in units of the inverse largest curvature of
    the training cost, so 0.5 is safe for any M and dataset. ``cost_span=None``
    picks ``first_n`` for phase-only modulators and ``all_m`` otherwise.
    """

    learning_rate: float = 0.5
    max_epochs: int = 5000
    valid_threshold: float = 1e-3
    seed: int = 0
    constraint: ModulatorConstraint = field(default_factory=ModulatorConstraint)
    cost_span: Optional[str] = None
    early_stop: bool = True

    def __post_init__(self):
        if not self.learning_rate >= 0:
            raise InvalidConfigError("learning_rate must be non-negative")
        if self.max_epochs < 1:
            raise InvalidConfigError("max_epochs must be >= 1")
        if not self.valid_threshold > 0:
            raise InvalidConfigError("valid_threshold must be positive")
        if self.cost_span is not None and self.cost_span not in SPANS:
            raise InvalidConfigError(f"cost_span must be one of {SPANS}")

    def resolved_span(self) -> str:
        if self.cost_span is not None:
            return self.cost_span
        return "first_n" if self.constraint.kind == "phase_only" else "all_m"

    def to_json(self) -> dict:
        return {
            "learning_rate": self.learning_rate,
            "max_epochs": self.max_epochs,
            "valid_threshold": self.valid_threshold,
            "seed": self.seed,
            "constraint": self.constraint.to_json(),
            "cost_span": self.resolved_span(),
            "early_stop": self.early_stop,
        }


@dataclass
class TrainRun:
    weights: np.ndarray
    epochs_used: int
    train_history: list[float]
    valid_history: list[float]
    converged: bool
    config: Optional[TrainConfig] = None


@dataclass(frozen=True)
class GateReport:
    transmission_distance: float
    gate_distance: float
    unitarity_defect: float

    def to_json(self) -> dict:
        return {
            "transmission_distance": self.transmission_distance,
            "gate_distance": self.gate_distance,
            "unitarity_defect": self.unitarity_defect,
        }


def generate_dataset(
    target: TargetEmbedding | np.ndarray,
    n_train: int,
    n_valid: int,
    rng: RandomSource | np.random.Generator,
) -> Dataset:
    """Random unit-norm complex inputs labelled with ``y = T x``."""
    t = target.target if isinstance(target, TargetEmbedding) else as_matrix(target, "target")
    if t.shape[0] != t.shape[1]:
        raise InvalidDimensionError(f"dataset target must be square (M x M), got {t.shape}")
    if n_train < 1 or n_valid < 1:
        raise InvalidConfigError("n_train and n_valid must be positive")
    gen = rng.generator() if isinstance(rng, RandomSource) else rng
    x = complex_gaussian(gen, (t.shape[0], n_train + n_valid))
    x /= np.linalg.norm(x, axis=0)
    return Dataset(x, t @ x, int(n_train), int(n_valid))


def _span_size(m: int, span: Optional[int]) -> int:
    if span is None:
        return m
    if not 1 <= span <= m:
        raise InvalidDimensionError(f"cost span {span} out of range for M={m}")
    return int(span)


def _residual(u, w, x, y, span):
    u, w = np.asarray(u, dtype=np.complex128), np.asarray(w, dtype=np.complex128)
    x, y = np.asarray(x, dtype=np.complex128), np.asarray(y, dtype=np.complex128)
    m = u.shape[0]
    if u.shape != (m, m) or w.shape != (m, m) or x.shape[0] != m or y.shape != x.shape:
        raise InvalidDimensionError(
            f"inconsistent shapes: U {u.shape}, W {w.shape}, x {x.shape}, y {y.shape}"
        )
    k = _span_size(m, span)
    r = y - u @ (w @ x)
    r[k:] = 0
    return r, k


def cost(u, w, x, y, span: Optional[int] = None) -> float:
    """Mean squared residual modulus over the first ``span`` components (all if None).

    ``x`` and ``y`` may be single vectors or ``M x B`` batches; batches are
    averaged over columns.
    """
    r, k = _residual(u, w, x, y, span)
    batch = 1 if r.ndim == 1 else r.shape[1]
    with np.errstate(over="ignore", invalid="ignore"):
        return float(np.sum(r.real**2 + r.imag**2) / (k * batch))


def cost_gradient(u, w, x, y, span: Optional[int] = None) -> np.ndarray:
    """Wirtinger gradient ``d cost / d conj(W) = -(1/K) U^dagger r x^dagger``.

    The gradient with respect to the real parameters ``(Re W, Im W)`` is
    ``(2 Re g, 2 Im g)``.
    """
    r, k = _residual(u, w, x, y, span)
    u = np.asarray(u, dtype=np.complex128)
    x = np.asarray(x, dtype=np.complex128)
    if r.ndim == 1:
        return -np.outer(u.conj().T @ r, x.conj()) / k
    return -(u.conj().T @ r) @ x.conj().T / (k * r.shape[1])


def curvature(x_train: np.ndarray, k: int) -> float:
    """Largest Hessian eigenvalue of the training cost in real coordinates."""
    c = x_train @ x_train.conj().T / x_train.shape[1]
    return 2.0 / k * float(np.linalg.eigvalsh(c)[-1])


INIT_STREAM = 0x1A17


def initial_weights(m: int, seed: int) -> np.ndarray:
    """I.i.d. Gaussian real and imaginary parts with deviation ``1/sqrt(m)``."""
    gen = RandomSource(seed).derive(INIT_STREAM).generator()
    re = gen.standard_normal((m, m))
    im = gen.standard_normal((m, m))
    return (re + 1j * im) / np.sqrt(m)


def span_for(config: TrainConfig, n: int) -> Optional[int]:
    return n if config.resolved_span() == "first_n" else None


def train(
    u,
    dataset: Dataset,
    config: TrainConfig = TrainConfig(),
    n: Optional[int] = None,
    init: Optional[np.ndarray] = None,
) -> TrainRun:
    """Full-batch gradient descent with optional constraint retraction.

    One epoch is one update over the whole training set followed by the
    retraction and a validation pass. ``n`` is the gate dimension, needed only
    when the cost spans the first ``n`` components.
    """
    u = as_matrix(u, "reservoir")
    m = u.shape[0]
    if dataset.m != m:
        raise InvalidDimensionError(f"dataset dimension {dataset.m} != reservoir dimension {m}")
    if config.resolved_span() == "first_n" and n is None:
        raise InvalidConfigError("cost_span 'first_n' needs the gate dimension n")
    span = span_for(config, n) if n is not None else None
    k = _span_size(m, span)

    x_tr, y_tr = dataset.train
    x_va, y_va = dataset.valid
    step = config.learning_rate / curvature(x_tr, k)

    w = initial_weights(m, config.seed) if init is None else as_matrix(init, "init").copy()
    if config.constraint.kind != "unconstrained":
        w = retract(w, config.constraint)

    train_hist: list[float] = []
    valid_hist: list[float] = []
    converged = False
    for epoch in range(config.max_epochs):
        g = cost_gradient(u, w, x_tr, y_tr, span)
        w = retract(w - 2.0 * step * g, config.constraint)
        tr = cost(u, w, x_tr, y_tr, span)
        va = cost(u, w, x_va, y_va, span)
        if not (np.isfinite(tr) and np.isfinite(va)):
            last = valid_hist[-1] if valid_hist else float("nan")
            raise DivergenceError(f"cost became non-finite at epoch {epoch + 1}", last)
        train_hist.append(tr)
        valid_hist.append(va)
        converged = va <= config.valid_threshold
        if converged and config.early_stop:
            break
    return TrainRun(w, len(valid_hist), train_hist, valid_hist, converged, config)


def verify_gate(u, w, target: TargetEmbedding) -> GateReport:
    """Compare the achieved transmission ``U W`` with the target embedding."""
    t = np.asarray(u, dtype=np.complex128) @ np.asarray(w, dtype=np.complex128)
    rows = target.target.shape[0]
    return GateReport(
        transmission_distance=frobenius_distance(t[:rows], target.target),
        gate_distance=frobenius_distance(achieved_gate(t, target.n), target.gate.matrix),
        unitarity_defect=unitarity_defect(w),
    )


def with_constraint(config: TrainConfig, constraint: ModulatorConstraint) -> TrainConfig:
    return replace(config, constraint=constraint)
