"""Dense complex linear algebra for small square matrices (n <= ~12).

Everything works on plain complex ndarrays; :class:`ComplexSquareMatrix` is a
thin validated wrapper used at serialization boundaries. All operations are
pure and safe to call concurrently.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .errors import SingularMatrix

# Relative scale of the default pivot floor used by invert().
PIVOT_FLOOR_SCALE = 1e-12
# Below this absolute scale a spectrum is treated as identically zero.
SPECTRUM_ABS_FLOOR = 1e-12


def as_matrix(m) -> np.ndarray:
    """Coerce a ComplexSquareMatrix or array-like to a complex square ndarray."""
    a = np.asarray(getattr(m, "entries", m), dtype=complex)
    if a.ndim != 2 or a.shape[0] != a.shape[1]:
        raise ValueError(f"expected a square matrix, got shape {a.shape}")
    return a


@dataclass(frozen=True)
class ComplexSquareMatrix:
    """An n x n complex matrix with finite entries."""

    n: int
    entries: np.ndarray

    def __post_init__(self):
        a = np.asarray(self.entries, dtype=complex)
        if self.n < 1:
            raise ValueError("dimension must be positive")
        if a.shape == (self.n * self.n,):
            a = a.reshape(self.n, self.n)
        if a.shape != (self.n, self.n):
            raise ValueError(f"entries shape {a.shape} does not match n={self.n}")
        if not np.all(np.isfinite(a.view(float))):
            raise ValueError("entries must be finite (no NaN/Inf)")
        object.__setattr__(self, "entries", a)

    @classmethod
    def from_array(cls, a) -> "ComplexSquareMatrix":
        a = as_matrix(a)
        return cls(n=a.shape[0], entries=a)


@dataclass(frozen=True)
class SpectrumReport:
    """Singular values of a matrix with numeric rank/nullity at a tolerance."""

    values: tuple
    rank: int
    nullity: int
    tolerance_used: float


def default_pivot_floor(a: np.ndarray) -> float:
    """Default singularity floor: PIVOT_FLOOR_SCALE times the largest row norm."""
    return PIVOT_FLOOR_SCALE * float(np.max(np.linalg.norm(a, axis=1)))


def det(m) -> complex:
    """Determinant by pivoted LU elimination (0 is a valid return)."""
    return complex(np.linalg.det(as_matrix(m)))


def invert(m, pivot_floor: float | None = None) -> np.ndarray:
    """Invert by Gauss-Jordan elimination with partial pivoting.

    Raises SingularMatrix when the best available pivot magnitude is at or
    below the floor (default: PIVOT_FLOOR_SCALE * max row norm). The potential
    is undefined near det g = 0, so callers must fail loudly there.
    """
    a = as_matrix(m)
    n = a.shape[0]
    if pivot_floor is None:
        pivot_floor = default_pivot_floor(a)
    aug = np.hstack([a.copy(), np.eye(n, dtype=complex)])
    for k in range(n):
        p = k + int(np.argmax(np.abs(aug[k:, k])))
        pivot = aug[p, k]
        if abs(pivot) <= pivot_floor:
            raise SingularMatrix(abs(pivot), pivot_floor)
        if p != k:
            aug[[k, p]] = aug[[p, k]]
        aug[k] /= pivot
        rows = np.arange(n) != k
        aug[rows] -= np.outer(aug[rows, k], aug[k])
    return aug[:, n:]


def singular_spectrum(m, tol: float = 1e-8) -> SpectrumReport:
    """Singular values sorted descending, with rank/nullity at a relative tol.

    Nullity counts values below tol * (largest value); a spectrum whose largest
    value is below SPECTRUM_ABS_FLOOR has nullity n.
    """
    if tol <= 0:
        raise ValueError("tol must be positive")
    values = np.linalg.svd(as_matrix(m), compute_uv=False)
    n = values.shape[0]
    if values[0] < SPECTRUM_ABS_FLOOR:
        nullity = n
    else:
        nullity = int(np.sum(values < tol * values[0]))
    return SpectrumReport(
        values=tuple(float(v) for v in values),
        rank=n - nullity,
        nullity=nullity,
        tolerance_used=float(tol),
    )


def fourier_matrix(n: int) -> np.ndarray:
    """The n x n matrix with entries exp(2*pi*i*j*k/n), j, k = 0..n-1."""
    if n < 1:
        raise ValueError("n must be positive")
    j = np.arange(n)
    return np.exp(2j * np.pi * np.outer(j, j) / n)


def random_torus_matrix(n: int, seed: int, modulus_range=(0.5, 2.0)) -> np.ndarray:
    """Seeded random matrix with log-uniform entry moduli and uniform phases.

    Uses numpy's PCG64 stream, so a given seed reproduces the same matrix on
    any platform. Moduli are drawn first, phases second.
    """
    low, high = modulus_range
    if not (0 < low <= high):
        raise ValueError(f"invalid modulus range {modulus_range!r}")
    rng = np.random.Generator(np.random.PCG64(seed))
    moduli = np.exp(rng.uniform(np.log(low), np.log(high), size=(n, n)))
    phases = rng.uniform(0.0, 2.0 * np.pi, size=(n, n))
    return moduli * np.exp(1j * phases)
