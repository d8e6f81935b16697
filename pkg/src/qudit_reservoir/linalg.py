"""Dense complex linear algebra, Haar sampling and seeded randomness.

Matrices are plain ``numpy`` arrays of dtype ``complex128``. The helpers here
add dimension checking on top of numpy so that the rest of the package can
raise :class:`InvalidDimensionError` consistently.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .errors import InvalidDimensionError, ParseError

_MASK64 = (1 << 64) - 1


@dataclass(frozen=True)
class RandomSource:
    """Splittable seed: ``(seed, stream)`` fully determines every draw.

    Child streams are derived with :meth:`derive`, which extends the spawn key
    instead of consuming state, so trials can be replayed individually and in
    any order.
    """

    seed: int
    stream: tuple[int, ...] = ()

    def __post_init__(self):
        if not 0 <= self.seed <= _MASK64:
            raise ValueError(f"seed must be a 64-bit unsigned integer, got {self.seed}")
        if isinstance(self.stream, int):
            object.__setattr__(self, "stream", (self.stream,))
        for s in self.stream:
            if not 0 <= s <= _MASK64:
                raise ValueError(f"stream ids must be 64-bit unsigned integers, got {s}")

    def derive(self, *ids: int) -> "RandomSource":
        return RandomSource(self.seed, tuple(self.stream) + tuple(int(i) for i in ids))

    def generator(self) -> np.random.Generator:
        ss = np.random.SeedSequence(self.seed, spawn_key=self.stream)
        return np.random.Generator(np.random.PCG64(ss))


def as_matrix(a, name: str = "matrix") -> np.ndarray:
    """Coerce to a finite 2-D complex array."""
    arr = np.asarray(a, dtype=np.complex128)
    if arr.ndim != 2 or 0 in arr.shape:
        raise InvalidDimensionError(f"{name} must be a non-empty 2-D array, got shape {arr.shape}")
    if not np.all(np.isfinite(arr)):
        raise ValueError(f"{name} has non-finite entries")
    return arr


def as_vector(x, name: str = "vector") -> np.ndarray:
    arr = np.asarray(x, dtype=np.complex128)
    if arr.ndim != 1 or arr.size == 0:
        raise InvalidDimensionError(f"{name} must be a non-empty 1-D array, got shape {arr.shape}")
    if not np.all(np.isfinite(arr)):
        raise ValueError(f"{name} has non-finite entries")
    return arr


def complex_gaussian(rng: np.random.Generator, shape) -> np.ndarray:
    """I.i.d. standard complex normal entries (E|z|^2 = 1)."""
    return (rng.standard_normal(shape) + 1j * rng.standard_normal(shape)) / np.sqrt(2.0)


def haar_unitary(m: int, rng: RandomSource | np.random.Generator) -> np.ndarray:
    """Sample an ``m x m`` unitary from the Haar measure.

    QR-factorize a complex Ginibre matrix and rotate each column of Q by the
    phase of the matching diagonal entry of R. Without that correction the
    distribution of Q depends on the QR implementation's sign convention.
    """
    if int(m) < 1:
        raise InvalidDimensionError(f"unitary dimension must be >= 1, got {m}")
    gen = rng.generator() if isinstance(rng, RandomSource) else rng
    z = complex_gaussian(gen, (m, m))
    q, r = np.linalg.qr(z)
    d = np.diagonal(r)
    return q * (d / np.abs(d))


def dagger(a) -> np.ndarray:
    a = np.asarray(a, dtype=np.complex128)
    return a.conj().T


def matmul(a, b) -> np.ndarray:
    """Matrix product; ``b`` may be a vector."""
    a = np.asarray(a, dtype=np.complex128)
    b = np.asarray(b, dtype=np.complex128)
    if a.ndim != 2 or b.ndim not in (1, 2) or a.shape[1] != b.shape[0]:
        raise InvalidDimensionError(f"cannot multiply shapes {a.shape} and {b.shape}")
    return a @ b


def frobenius_distance(a, b) -> float:
    a = np.asarray(a, dtype=np.complex128)
    b = np.asarray(b, dtype=np.complex128)
    if a.shape != b.shape:
        raise InvalidDimensionError(f"shape mismatch {a.shape} vs {b.shape}")
    return float(np.sqrt(np.sum(np.abs(a - b) ** 2)))


def unitarity_defect(a) -> float:
    """``||A^dagger A - 1||_F``."""
    a = np.asarray(a, dtype=np.complex128)
    if a.ndim != 2 or a.shape[0] != a.shape[1]:
        raise InvalidDimensionError(f"unitarity defect needs a square matrix, got {a.shape}")
    return frobenius_distance(a.conj().T @ a, np.eye(a.shape[0]))


def matrix_to_json(a) -> dict:
    """Serialize as ``{"rows", "cols", "re", "im"}`` with row-major lists.

    Python's float repr is the shortest decimal that round-trips, so the
    JSON text reproduces every entry bit-exactly.
    """
    a = np.asarray(a, dtype=np.complex128)
    if a.ndim == 1:
        a = a[:, None]
    return {
        "rows": int(a.shape[0]),
        "cols": int(a.shape[1]),
        "re": [float(v) for v in a.real.ravel()],
        "im": [float(v) for v in a.imag.ravel()],
    }


def matrix_from_json(obj, field: str = "matrix") -> np.ndarray:
    """Inverse of :func:`matrix_to_json`; also accepts interleaved ``"data"``."""
    if not isinstance(obj, dict):
        raise ParseError(f"{field}: expected an object", field)
    try:
        rows, cols = int(obj["rows"]), int(obj["cols"])
    except (KeyError, TypeError, ValueError) as exc:
        raise ParseError(f"{field}: missing or invalid rows/cols", field) from exc
    if rows < 1 or cols < 1:
        raise ParseError(f"{field}: rows and cols must be positive", field)
    n = rows * cols
    try:
        if "re" in obj:
            re = np.asarray(obj["re"], dtype=float)
            im = np.asarray(obj.get("im", [0.0] * n), dtype=float)
        elif "data" in obj:
            data = np.asarray(obj["data"], dtype=float)
            if data.shape != (2 * n,):
                raise ParseError(f"{field}.data: expected {2 * n} numbers, got {data.size}", field + ".data")
            re, im = data[0::2], data[1::2]
        else:
            raise ParseError(f"{field}: needs 're'/'im' or 'data'", field)
    except (TypeError, ValueError) as exc:
        if isinstance(exc, ParseError):
            raise
        raise ParseError(f"{field}: entries must be numbers", field) from exc
    if re.shape != (n,) or im.shape != (n,):
        raise ParseError(f"{field}: expected {n} entries per part", field)
    out = (re + 1j * im).reshape(rows, cols)
    if not np.all(np.isfinite(out)):
        raise ParseError(f"{field}: non-finite entries", field)
    return out
