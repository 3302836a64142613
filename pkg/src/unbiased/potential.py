"""The unbiasedness potential on the matrix torus and its derivatives.

For an invertible matrix g with nonzero entries and a weight matrix L the
potential is

    F(g) = sum_ij L[i, j] * log(g[j, i]) - log(det(g))

Beware the index transposition throughout this module: the gradient entry
a[i, j] is the derivative with respect to g[j, i], not g[i, j]:

    a[i, j] = dF/dg[j, i] = L[i, j] / g[j, i] - ginv[i, j]

F itself is multi-valued (entrywise logarithms); critical-point detection
therefore only ever uses the rational forms (gradient and residual system),
never the logarithm. log_potential is reporting-only.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .errors import SingularMatrix, ZeroEntry
from .linalg import as_matrix, default_pivot_floor, invert
from .report import CheckReport

SUM_TOLERANCE = 1e-12


@dataclass(frozen=True)
class WeightMatrix:
    """Unbiasedness targets L[i, j] for k row projectors against n columns.

    Valid instances have all entries nonzero, unit row sums, and (when k = n)
    unit column sums; construction is permissive so that validate_weights can
    report on invalid data.
    """

    k: int
    n: int
    entries: np.ndarray

    def __post_init__(self):
        a = np.asarray(self.entries, dtype=complex)
        if a.shape != (self.k, self.n):
            raise ValueError(f"entries shape {a.shape} does not match ({self.k},{self.n})")
        object.__setattr__(self, "entries", a)


@dataclass(frozen=True)
class GaugeSlicePoint:
    """Gauge-fixed torus point: first row and column pinned to 1.

    Only the (n-1) x (n-1) block of free entries g[i, j], i, j >= 2 is stored.
    """

    n: int
    free_entries: np.ndarray

    def __post_init__(self):
        a = np.asarray(self.free_entries, dtype=complex)
        m = self.n - 1
        if a.shape == () and m == 0:
            a = a.reshape(0, 0)
        if a.shape != (m, m):
            raise ValueError(f"free entries shape {a.shape} does not match n={self.n}")
        object.__setattr__(self, "free_entries", a)

    def embed(self) -> np.ndarray:
        """The full n x n matrix with ones in the first row and column."""
        g = np.ones((self.n, self.n), dtype=complex)
        g[1:, 1:] = self.free_entries
        return g

    def free_vector(self) -> np.ndarray:
        """Free entries flattened in row-major order."""
        return self.free_entries.ravel().copy()

    @classmethod
    def from_free_vector(cls, n: int, v) -> "GaugeSlicePoint":
        return cls(n=n, free_entries=np.asarray(v, dtype=complex).reshape(n - 1, n - 1))


@dataclass(frozen=True)
class GradientMatrix:
    """Gradient of F with the transposed index convention a[i, j] = dF/dg[j, i]."""

    n: int
    entries: np.ndarray


def uniform_weights(n: int) -> WeightMatrix:
    """The n x n weight matrix with every target equal to 1/n."""
    if n < 1:
        raise ValueError("n must be positive")
    return WeightMatrix(k=n, n=n, entries=np.full((n, n), 1.0 / n, dtype=complex))


def validate_weights(w: WeightMatrix) -> CheckReport:
    """Report every violated weight constraint with its index and deviation.

    Enforced constraints: nonzero entries; row sums equal 1 (forced by unit
    projector traces); column sums equal 1 when k = n. For k < n the column
    sums are reported informationally, not as violations, since the transposed
    orientation is not forced for rectangular weights.
    """
    report = CheckReport()
    a = w.entries
    for i, j in np.argwhere(a == 0):
        report.add("nonzero", (int(i), int(j)), 0.0)
    row_dev = np.abs(a.sum(axis=1) - 1.0)
    for i in np.nonzero(row_dev > SUM_TOLERANCE)[0]:
        report.add("row_sum", (int(i),), float(row_dev[i]))
    col_dev = np.abs(a.sum(axis=0) - 1.0)
    if w.k == w.n:
        for j in np.nonzero(col_dev > SUM_TOLERANCE)[0]:
            report.add("column_sum", (int(j),), float(col_dev[j]))
    else:
        report.details["column_sums"] = [complex(s) for s in a.sum(axis=0)]
    return report


def _check_entries_nonzero(g: np.ndarray):
    zeros = np.argwhere(g == 0)
    if zeros.size:
        raise ZeroEntry(tuple(int(x) for x in zeros[0]))


def grad_F(g, w: WeightMatrix) -> GradientMatrix:
    """Gradient matrix A with a[i, j] = L[i, j]/g[j, i] - ginv[i, j].

    Note the transposition: a[i, j] differentiates with respect to g[j, i].
    """
    g = as_matrix(g)
    n = g.shape[0]
    if w.k != n or w.n != n:
        raise ValueError("grad_F requires a square weight matrix matching g")
    _check_entries_nonzero(g)
    a = w.entries / g.T - invert(g)
    return GradientMatrix(n=n, entries=a)


def critical_residual(g, w: WeightMatrix):
    """Values of the critical equations sum_j L[j, k] g[i, j]/g[k, j], i != k.

    Returns (norm, per_equation) where per_equation lists the n(n-1) values in
    row-major (i, k) order and norm is their Euclidean norm. The norm vanishes
    exactly at critical points of F. No matrix inversion is involved.
    """
    g = as_matrix(g)
    n = g.shape[0]
    if w.k != n or w.n != n:
        raise ValueError("critical_residual requires a square weight matrix matching g")
    _check_entries_nonzero(g)
    # R = g @ M with M[j, k] = L[j, k]/g[k, j]; off-diagonal entries of R are
    # the residuals, and R = I + g @ A for valid weights.
    r = g @ (w.entries / g.T)
    off = ~np.eye(n, dtype=bool)
    per_equation = [complex(v) for v in r[off]]
    return float(np.linalg.norm(r[off])), per_equation


def potential_power(g) -> complex:
    """The single-valued power det(g)**n / prod(g[i, j]).

    For uniform weights this is the n-th power of the inverse-exponential
    potential E = det(g) / prod(g[i, j])**(1/n); storing the power avoids
    root branches. The value is invariant under the two-sided diagonal torus
    action for any weights.
    """
    g = as_matrix(g)
    _check_entries_nonzero(g)
    n = g.shape[0]
    return complex(np.linalg.det(g)) ** n / complex(np.prod(g))


def log_potential(g, w: WeightMatrix) -> complex:
    """Principal-branch evaluation of F; branch-dependent, reporting only.

    Critical-point detection never calls this: the entrywise logarithms make F
    multi-valued, and the chosen branch carries no claim beyond principality.
    """
    g = as_matrix(g)
    n = g.shape[0]
    if w.k != n or w.n != n:
        raise ValueError("log_potential requires a square weight matrix matching g")
    _check_entries_nonzero(g)
    d = complex(np.linalg.det(g))
    floor = default_pivot_floor(g)
    if abs(d) <= floor:
        raise SingularMatrix(abs(d), floor)
    return complex(np.sum(w.entries * np.log(g.T)) - np.log(d))


def hessian_slice(p: GaugeSlicePoint, w: WeightMatrix) -> np.ndarray:
    """Holomorphic Hessian of F in the free slice coordinates.

    Entry ((r1,c1),(r2,c2)), rows/columns in row-major free-index order, is

        d2F / (dg[r1,c1] dg[r2,c2])
            = ginv[c1,r2]*ginv[c2,r1] - delta((r1,c1),(r2,c2)) * L[c1,r1]/g[r1,c1]**2

    (again the weight index is the transpose of the matrix-entry index). The
    result is symmetric and equals the Jacobian of the free components of
    grad_F, which is what the Newton solver factors.
    """
    g = p.embed()
    n = p.n
    if w.k != n or w.n != n:
        raise ValueError("hessian_slice requires a square weight matrix matching g")
    _check_entries_nonzero(g)
    ginv = invert(g)
    m = n - 1
    block = ginv[1:, 1:]
    h = np.einsum("bc,da->abcd", block, block).reshape(m * m, m * m)
    diag = (w.entries.T[1:, 1:] / g[1:, 1:] ** 2).ravel()
    h[np.diag_indices(m * m)] -= diag
    return h


def slice_gradient(p: GaugeSlicePoint, w: WeightMatrix) -> np.ndarray:
    """Free components of grad_F as a flat row-major vector.

    Component (r, c) is dF/dg[r, c] for r, c >= 2, i.e. the transposed
    gradient matrix restricted to the free block.
    """
    a = grad_F(p.embed(), w).entries
    return a.T[1:, 1:].ravel()
