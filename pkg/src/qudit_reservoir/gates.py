"""Target qudit gates and their embeddings into the rigged space."""

from __future__ import annotations

from dataclasses import dataclass
from typing import Literal, Optional

import numpy as np

from .errors import InvalidDimensionError, InvalidModeError, ValidationError
from .linalg import RandomSource, as_matrix, as_vector, haar_unitary, unitarity_defect

Mode = Literal["projected", "unitary"]
MODES = ("projected", "unitary")


@dataclass(frozen=True)
class GateSpec:
    """An ``N x N`` unitary target gate."""

    name: str
    matrix: np.ndarray

    def __post_init__(self):
        m = as_matrix(self.matrix, "gate")
        if m.shape[0] != m.shape[1]:
            raise InvalidDimensionError(f"gate must be square, got {m.shape}")
        defect = unitarity_defect(m)
        if defect > 1e-10:
            raise ValidationError(f"gate '{self.name}' is not unitary (defect {defect:.3g})", "gate")
        object.__setattr__(self, "matrix", m)

    @property
    def dim(self) -> int:
        return self.matrix.shape[0]


@dataclass(frozen=True)
class TargetEmbedding:
    """Target matrix in the rigged space.

    ``target`` is ``[X | 0]`` (``N x M``) in projected mode and the block
    matrix ``diag(X, O_C)`` (``M x M``) in unitary mode.
    """

    gate: GateSpec
    m: int
    mode: str
    target: np.ndarray
    complement: Optional[np.ndarray] = None

    @property
    def n(self) -> int:
        return self.gate.dim

    @property
    def c(self) -> int:
        return self.m - self.n


def _check_dim(d: int) -> int:
    d = int(d)
    if d < 2:
        raise InvalidDimensionError(f"gate dimension must be >= 2, got {d}")
    return d


def gate_x(d: int) -> GateSpec:
    """Cyclic shift ``|l> -> |l+1 mod d>``."""
    d = _check_dim(d)
    return GateSpec(f"x{d}", np.roll(np.eye(d, dtype=np.complex128), 1, axis=0))


def gate_x_squared(d: int) -> GateSpec:
    x = gate_x(d).matrix
    return GateSpec(f"x2_{d}", x @ x)


def gate_z(d: int) -> GateSpec:
    """Clock gate ``diag(w**l)`` with ``w = exp(2 pi i / d)``."""
    d = _check_dim(d)
    return GateSpec(f"z{d}", np.diag(np.exp(2j * np.pi * np.arange(d) / d)))


CATALOG = {"x": gate_x, "x2": gate_x_squared, "z": gate_z}


def gate_by_name(name: str, dim: int) -> GateSpec:
    try:
        factory = CATALOG[name]
    except KeyError:
        raise InvalidModeError(f"unknown gate '{name}', expected one of {sorted(CATALOG)}") from None
    return factory(dim)


def projector(n: int, m: int) -> np.ndarray:
    """Readout projector ``[1_n | 0]`` of shape ``n x m``."""
    n, m = int(n), int(m)
    if n < 1 or n > m:
        raise InvalidDimensionError(f"projector needs 1 <= n <= m, got n={n}, m={m}")
    return np.eye(n, m, dtype=np.complex128)


def embed_target(
    gate: GateSpec,
    m: int,
    mode: Mode,
    rng: RandomSource | np.random.Generator | None = None,
    complement: np.ndarray | None = None,
) -> TargetEmbedding:
    """Build the rigged-space target for ``gate``.

    In unitary mode the complement ``O_C`` is Haar-sampled from ``rng`` unless
    given explicitly. ``complement`` may also be an all-zero ``C x C`` matrix to
    obtain the non-unitary variant used for inference training.
    """
    if mode not in MODES:
        raise InvalidModeError(f"mode must be one of {MODES}, got {mode!r}")
    n, m = gate.dim, int(m)
    if m < n:
        raise InvalidDimensionError(f"embedding dimension {m} smaller than gate dimension {n}")
    c = m - n
    if c == 0:
        return TargetEmbedding(gate, m, mode, gate.matrix.copy(), None)
    if mode == "projected":
        target = np.zeros((n, m), dtype=np.complex128)
        target[:, :n] = gate.matrix
        return TargetEmbedding(gate, m, mode, target, None)

    if complement is None:
        if rng is None:
            raise InvalidModeError("unitary embedding needs an rng or an explicit complement")
        complement = haar_unitary(c, rng)
    complement = as_matrix(complement, "complement")
    if complement.shape != (c, c):
        raise InvalidDimensionError(f"complement must be {c}x{c}, got {complement.shape}")
    target = np.zeros((m, m), dtype=np.complex128)
    target[:n, :n] = gate.matrix
    target[n:, n:] = complement
    return TargetEmbedding(gate, m, mode, target, complement)


def rig_input(x, m: int) -> np.ndarray:
    """Pad ``x`` with zero-amplitude ancillas up to length ``m``."""
    x = as_vector(x, "input")
    if x.size > m:
        raise InvalidDimensionError(f"input of dimension {x.size} does not fit in {m}")
    out = np.zeros(int(m), dtype=np.complex128)
    out[: x.size] = x
    return out


def achieved_gate(t, n: int) -> np.ndarray:
    """Logical ``n x n`` block (top-left) of a transmission matrix."""
    t = np.asarray(t, dtype=np.complex128)
    if t.ndim != 2 or t.shape[0] < n or t.shape[1] < n or n < 1:
        raise InvalidDimensionError(f"cannot take a {n}x{n} block of shape {t.shape}")
    return t[:n, :n].copy()
