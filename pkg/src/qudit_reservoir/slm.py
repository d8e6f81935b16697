"""Spatial-light-modulator realizations of the input operator.

A single modulator illuminated by a plane wave must carry both the trained
operator and the input state, ``S_tilde = S @ diag(x)``. Device physics enters
training only through a retraction onto the modulator's feasible set, applied
after every update:

* ``phase_only``: unit-modulus entries ``exp(i phi_ij)``;
* ``amplitude_signed``: real entries clipped to ``[-1, 1]``, optionally
  rounded to ``2**bits + 1`` uniform levels.
"""

from __future__ import annotations

from dataclasses import dataclass
from typing import Optional

import numpy as np

from .errors import InvalidConfigError, InvalidDimensionError
from .gates import rig_input
from .linalg import as_matrix, as_vector

KINDS = ("unconstrained", "phase_only", "amplitude_signed")
_ALIASES = {"none": "unconstrained", "phase": "phase_only", "amp": "amplitude_signed"}

# 2**53 + 1 levels on [-1, 1] are already finer than a double can resolve.
CONTINUOUS_BITS = 53


@dataclass(frozen=True)
class ModulatorConstraint:
    kind: str = "unconstrained"
    bits: Optional[int] = None

    def __post_init__(self):
        kind = _ALIASES.get(self.kind, self.kind)
        if kind not in KINDS:
            raise InvalidConfigError(f"unknown constraint {self.kind!r}, expected one of {KINDS}")
        object.__setattr__(self, "kind", kind)
        if self.bits is not None:
            if int(self.bits) < 1:
                raise InvalidConfigError(f"bits must be >= 1, got {self.bits}")
            if kind == "unconstrained":
                raise InvalidConfigError("bits requires a phase_only or amplitude_signed constraint")
            object.__setattr__(self, "bits", int(self.bits))

    @property
    def label(self) -> str:
        return self.kind if self.bits is None else f"{self.kind}:{self.bits}bit"

    def to_json(self) -> dict:
        return {"kind": self.kind, "bits": self.bits}


@dataclass(frozen=True)
class SlmEncoding:
    base_operator: np.ndarray
    encoded: np.ndarray
    input_vector: np.ndarray


def plane_wave(n: int, m: int) -> np.ndarray:
    """``e_M``: ``n`` ones followed by ``m - n`` zeros."""
    return rig_input(np.ones(int(n)), m)


def encode_input(s, x, m: int) -> SlmEncoding:
    """Fold the input state into the modulator pattern: ``S @ diag(rig(x))``."""
    s = as_matrix(s, "operator")
    if s.shape != (m, m):
        raise InvalidDimensionError(f"operator must be {m}x{m}, got {s.shape}")
    xr = rig_input(as_vector(x, "input"), m)
    return SlmEncoding(s, s * xr[None, :], xr)


def retract_phase(w, bits: Optional[int] = None) -> np.ndarray:
    """Project every entry onto the unit circle; zero maps to 1.

    With ``bits`` the phase is additionally rounded to ``2**bits`` uniform
    levels (ties toward zero phase).
    """
    w = np.asarray(w, dtype=np.complex128)
    phi = np.angle(w)  # angle(0) == 0
    if bits is not None and bits < CONTINUOUS_BITS:
        step = 2 * np.pi / 2**bits
        k = phi / step
        phi = np.sign(k) * np.ceil(np.abs(k) - 0.5) * step
    return np.exp(1j * phi)


def quantize_levels(v, bits: int) -> np.ndarray:
    """Nearest of the ``2**bits + 1`` levels ``k / 2**(bits-1)`` on [-1, 1], ties toward zero."""
    v = np.asarray(v, dtype=float)
    if bits >= CONTINUOUS_BITS:
        return v.copy()
    half = float(2 ** (bits - 1))
    return np.sign(v) * np.ceil(np.abs(v) * half - 0.5) / half


def retract_amplitude(w, bits: Optional[int] = None) -> np.ndarray:
    """Real part clipped to [-1, 1], optionally quantized. Returned as complex dtype."""
    w = np.asarray(w, dtype=np.complex128)
    v = np.clip(w.real, -1.0, 1.0)
    if bits is not None:
        v = quantize_levels(v, bits)
    return v.astype(np.complex128)


def retract(w, constraint: ModulatorConstraint) -> np.ndarray:
    if constraint.kind == "phase_only":
        return retract_phase(w, constraint.bits)
    if constraint.kind == "amplitude_signed":
        return retract_amplitude(w, constraint.bits)
    return np.asarray(w, dtype=np.complex128)


def constrained_train(u, dataset, config):
    """Projected gradient descent: :func:`inference.train` with ``config.constraint``."""
    from .inference import train

    return train(u, dataset, config)
