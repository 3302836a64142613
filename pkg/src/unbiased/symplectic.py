"""Numerical validation of the symplectic structures behind unbiasedness.

Two-forms are evaluated as antisymmetrized bilinear pairings on explicit
tangent matrices; there is no differential-form data structure. The cotangent
side lives on pairs (g, A) constrained by diag(A g) = 0, the orbit side on
tuples of rank-1 projectors r_i = g q_i g^{-1} (1 + g A).
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .errors import SingularMatrix
from .linalg import as_matrix, invert, random_torus_matrix, singular_spectrum
from .report import CheckReport
from .verify import coordinate_projectors

# Tolerance on the momentum constraint diag(A g) = 0.
CONSTRAINT_TOL = 1e-12
# Condition-number guard on 1 + gA; the embedding is only open, not global.
CONDITION_LIMIT = 1e6


@dataclass(frozen=True)
class CotangentPoint:
    """A point (g, A) of the constrained cotangent space: diag(A g) = 0."""

    g: np.ndarray
    A: np.ndarray

    def __post_init__(self):
        object.__setattr__(self, "g", as_matrix(self.g))
        object.__setattr__(self, "A", as_matrix(self.A))
        if self.g.shape != self.A.shape:
            raise ValueError("g and A must share one dimension")

    @property
    def n(self) -> int:
        return self.g.shape[0]

    def constraint_deviation(self) -> float:
        return float(np.max(np.abs(np.diag(self.A @ self.g))))


@dataclass(frozen=True)
class TangentPair:
    """A tangent (dg, dA) at a cotangent point.

    Tangency to the constraint means diag(dA g + A dg) = 0 at the base point.
    """

    dg: np.ndarray
    dA: np.ndarray

    def __post_init__(self):
        object.__setattr__(self, "dg", as_matrix(self.dg))
        object.__setattr__(self, "dA", as_matrix(self.dA))
        if self.dg.shape != self.dA.shape:
            raise ValueError("dg and dA must share one dimension")


def tangent_constraint_deviation(pt: CotangentPoint, t: TangentPair) -> float:
    return float(np.max(np.abs(np.diag(t.dA @ pt.g + pt.A @ t.dg))))


def _require_constrained(pt: CotangentPoint):
    dev = pt.constraint_deviation()
    if dev > CONSTRAINT_TOL * max(1.0, float(np.max(np.abs(pt.A @ pt.g)) or 1.0)):
        raise ValueError(f"constraint diag(A g) = 0 violated by {dev:.3e}")


def moment_sum(ps, P) -> np.ndarray:
    """The moment-map value sum_i p_i - P of a tuple of projectors."""
    P = as_matrix(P)
    total = -P.astype(complex)
    for p in ps:
        total = total + as_matrix(p)
    return total


def rank_k_lemma_check(ps, tol: float = 1e-8):
    """Evaluate both sides of the rank-k sum criterion independently.

    Returns (sum_is_projector, pairwise_orthogonal): whether the sum of the
    rank-1 idempotents is itself a projector of rank k, and whether the
    members are pairwise orthogonal. The two answers agree on valid input;
    the property suite asserts that equivalence.
    """
    ps = [as_matrix(p) for p in ps]
    k = len(ps)
    s = np.zeros_like(ps[0])
    for p in ps:
        s = s + p
    idempotent = float(np.linalg.norm(s @ s - s, 2)) <= tol
    rank_ok = singular_spectrum(s, tol=max(tol, 1e-12)).rank == k
    sum_is_projector = idempotent and rank_ok
    pairwise = True
    for i in range(k):
        for j in range(k):
            if i != j and float(np.linalg.norm(ps[i] @ ps[j], 2)) > tol:
                pairwise = False
    return sum_is_projector, pairwise


def _one_plus_gA(pt: CotangentPoint) -> np.ndarray:
    m = np.eye(pt.n, dtype=complex) + pt.g @ pt.A
    svals = np.linalg.svd(m, compute_uv=False)
    if svals[-1] <= svals[0] / CONDITION_LIMIT:
        raise SingularMatrix(svals[-1], svals[0] / CONDITION_LIMIT)
    return m


def phi_embed(pt: CotangentPoint) -> list:
    """The projector tuple r_i = g q_i g^{-1} (1 + g A).

    Each r_i is a rank-1 idempotent whenever diag(A g) = 0; at A = 0 the
    tuple is exactly the orthogonal system g q_i g^{-1}.
    """
    _require_constrained(pt)
    g = pt.g
    ginv = invert(g)
    shift = _one_plus_gA(pt)
    return [np.outer(g[:, i], ginv[i, :]) @ shift for i in range(pt.n)]


def phi_differential(pt: CotangentPoint, t: TangentPair) -> list:
    """Exact directional derivative of phi_embed along (dg, dA).

    Uses d(g^{-1}) = -g^{-1} dg g^{-1}:
        dp_i = dg q_i g^{-1} - p_i dg g^{-1}
        dr_i = dp_i (1 + gA) + p_i (dg A + g dA)
    """
    _require_constrained(pt)
    g, A, dg, dA = pt.g, pt.A, t.dg, t.dA
    ginv = invert(g)
    shift = _one_plus_gA(pt)
    dg_ginv = dg @ ginv
    inner = dg @ A + g @ dA
    out = []
    for i in range(pt.n):
        p_i = np.outer(g[:, i], ginv[i, :])
        dp_i = np.outer(dg[:, i], ginv[i, :]) - p_i @ dg_ginv
        out.append(dp_i @ shift + p_i @ inner)
    return out


def omega_X(t1: TangentPair, t2: TangentPair) -> complex:
    """The cotangent form Tr(dA dg) paired on two tangents (antisymmetrized)."""
    return complex(np.trace(t1.dA @ t2.dg) - np.trace(t2.dA @ t1.dg))


def omega_Y(rs, drs1, drs2) -> complex:
    """The orbit-product form: sum_i Tr(r_i dr_i dr_i) antisymmetrized."""
    if not (len(rs) == len(drs1) == len(drs2)):
        raise ValueError("lists must have equal length")
    total = 0.0 + 0.0j
    for r, d1, d2 in zip(rs, drs1, drs2):
        r, d1, d2 = as_matrix(r), as_matrix(d1), as_matrix(d2)
        total += np.trace(r @ d1 @ d2) - np.trace(r @ d2 @ d1)
    return complex(total)


@dataclass(frozen=True)
class PullbackReport:
    """Outcome of comparing omega_X against the pulled-back orbit form."""

    max_deviation: float
    trials: int
    seed: int
    tolerance: float

    @property
    def passed(self) -> bool:
        return self.max_deviation < self.tolerance

    def to_json(self) -> dict:
        return {
            "max_deviation": self.max_deviation,
            "trials": self.trials,
            "seed": self.seed,
            "tolerance": self.tolerance,
            "passed": self.passed,
        }


def project_momentum(g, A) -> np.ndarray:
    """Correct A by the diagonal-parameterized shift making diag(A g) = 0.

    The correction is A - D g^{-1} with D = diag(A g); it is the unique shift
    of that form, and exact up to rounding for any invertible g.
    """
    g, A = as_matrix(g), as_matrix(A)
    d = np.diag(A @ g)
    return A - np.diag(d) @ invert(g)


def random_cotangent_point(n: int, seed: int, momentum_scale: float = 0.3) -> CotangentPoint:
    """Seeded valid cotangent point with moderate conditioning."""
    rng = np.random.Generator(np.random.PCG64(seed))
    for attempt in range(64):
        g = random_torus_matrix(n, seed * 1009 + 7 * attempt + 1)
        A = momentum_scale * (rng.standard_normal((n, n)) + 1j * rng.standard_normal((n, n)))
        A = project_momentum(g, A)
        m = np.eye(n) + g @ A
        svals = np.linalg.svd(m, compute_uv=False)
        if np.linalg.cond(g) < 1e3 and svals[-1] > svals[0] / 1e3:
            return CotangentPoint(g=g, A=A)
    raise RuntimeError("could not sample a well-conditioned cotangent point")


def random_constraint_tangent(pt: CotangentPoint, rng) -> TangentPair:
    """Random tangent satisfying diag(dA g + A dg) = 0 at the base point.

    dA is corrected by the unique diagonal-parameterized shift D g^{-1},
    solvable because g is invertible.
    """
    n = pt.n
    dg = rng.standard_normal((n, n)) + 1j * rng.standard_normal((n, n))
    dA = rng.standard_normal((n, n)) + 1j * rng.standard_normal((n, n))
    d = np.diag(dA @ pt.g + pt.A @ dg)
    dA = dA - np.diag(d) @ invert(pt.g)
    return TangentPair(dg=dg, dA=dA)


def pullback_symplectic_check(pt: CotangentPoint, trials: int, seed: int,
                              tol: float = 1e-8) -> PullbackReport:
    """Compare omega_X with the orbit form pulled back through the embedding.

    Samples random constraint tangents and reports the maximum absolute
    difference between omega_X(t1, t2) and omega_Y on the pushed-forward
    tangents. Small deviations are the numerical content of the statement
    that the embedding is symplectic.
    """
    if trials < 1:
        raise ValueError("trials must be positive")
    _require_constrained(pt)
    rng = np.random.Generator(np.random.PCG64(seed))
    rs = phi_embed(pt)
    worst = 0.0
    for _ in range(trials):
        t1 = random_constraint_tangent(pt, rng)
        t2 = random_constraint_tangent(pt, rng)
        lhs = omega_X(t1, t2)
        rhs = omega_Y(rs, phi_differential(pt, t1), phi_differential(pt, t2))
        worst = max(worst, abs(lhs - rhs))
    return PullbackReport(max_deviation=worst, trials=trials, seed=seed, tolerance=tol)


def kks_bracket(p, M, N) -> complex:
    """Orbit Poisson bracket of the linear functions Tr(. M), Tr(. N) at p."""
    p, M, N = as_matrix(p), as_matrix(M), as_matrix(N)
    return complex(np.trace(p @ (M @ N - N @ M)))


@dataclass(frozen=True)
class IsotropyEvidence:
    """Evidence that solution-set tangents are isotropic for the aggregate
    orbit form.

    max_pairing is the largest antisymmetrized form value over tangent pairs,
    reference_scale a typical value on unconstrained orbit directions at the
    same point. Evidence only; the tangents are first-order numerical
    approximations (Hessian null vectors), so this is never a gate.
    """

    k: int
    directions: int
    max_pairing: float
    reference_scale: float

    def to_json(self) -> dict:
        return {
            "k": self.k,
            "directions": self.directions,
            "max_pairing": self.max_pairing,
            "reference_scale": self.reference_scale,
        }


def aggregate_isotropy_evidence(g, slice_tangents, k: int, seed: int = 0) -> IsotropyEvidence:
    """Evaluate the aggregate-projector orbit form on solution-set tangents.

    ``slice_tangents`` are free-coordinate tangent vectors of the gauge slice
    (typically Hessian null directions at a converged critical point). Each
    induces a motion dP of the aggregate P = sum of the first k projectors
    p_i = g q_i g^{-1}; the form Tr(P dP1 dP2) antisymmetrized should vanish
    on such pairs, while staying order-one on random orbit directions, which
    is what reference_scale records.
    """
    g = as_matrix(g)
    n = g.shape[0]
    ginv = invert(g)
    projectors = [np.outer(g[:, i], ginv[i, :]) for i in range(k)]
    P = sum(projectors)

    def aggregate_motion(tangent_vec):
        dg = np.zeros((n, n), dtype=complex)
        dg[1:, 1:] = np.asarray(tangent_vec, dtype=complex).reshape(n - 1, n - 1)
        dg_ginv = dg @ ginv
        total = np.zeros((n, n), dtype=complex)
        for i in range(k):
            total += np.outer(dg[:, i], ginv[i, :]) - projectors[i] @ dg_ginv
        return total

    def pairing(x, y):
        return abs(np.trace(P @ x @ y) - np.trace(P @ y @ x))

    motions = [aggregate_motion(t) for t in slice_tangents]
    worst = 0.0
    for i in range(len(motions)):
        for j in range(i + 1, len(motions)):
            ni, nj = np.linalg.norm(motions[i]), np.linalg.norm(motions[j])
            if ni > 0 and nj > 0:
                worst = max(worst, pairing(motions[i], motions[j]) / (ni * nj))
    rng = np.random.Generator(np.random.PCG64(seed))
    scale = 0.0
    for _ in range(8):
        x = [P @ m - m @ P for m in
             (rng.standard_normal((n, n)) + 1j * rng.standard_normal((n, n)),
              rng.standard_normal((n, n)) + 1j * rng.standard_normal((n, n)))]
        nx, ny = np.linalg.norm(x[0]), np.linalg.norm(x[1])
        if nx > 0 and ny > 0:
            scale = max(scale, pairing(x[0], x[1]) / (nx * ny))
    return IsotropyEvidence(
        k=k, directions=len(motions), max_pairing=worst, reference_scale=scale,
    )


def random_rank1_idempotent(n: int, rng) -> np.ndarray:
    """Random (non-Hermitian) rank-1 idempotent x y^T / (y . x)."""
    while True:
        x = rng.standard_normal(n) + 1j * rng.standard_normal(n)
        y = rng.standard_normal(n) + 1j * rng.standard_normal(n)
        pairing = y @ x
        if abs(pairing) > 0.3 * np.linalg.norm(x) * np.linalg.norm(y):
            return np.outer(x, y) / pairing


def random_orthogonal_tuple(n: int, k: int, seed: int) -> list:
    """k pairwise-orthogonal rank-1 idempotents: conjugated coordinate
    projectors by a seeded well-conditioned matrix."""
    for attempt in range(64):
        g = random_torus_matrix(n, seed + 613 * attempt)
        if np.linalg.cond(g) < 1e3:
            ginv = invert(g)
            return [np.outer(g[:, i], ginv[i, :]) for i in range(k)]
    raise RuntimeError("could not sample a well-conditioned conjugator")


def integrable_commute_check(p_samples, trials: int = 0, seed: int = 0) -> CheckReport:
    """All brackets of the coordinate-trace functions vanish identically.

    For every sample point p and every pair of coordinate projectors, the
    bracket Tr(p [q_j, q_l]) is asserted to be bitwise zero (diagonal matrices
    commute exactly). Extra seeded random orbit points are drawn when trials
    exceeds the number of supplied samples. Brackets of functions living on
    distinct factors of a product of orbits vanish identically as well, being
    functions of independent variables; nothing needs evaluating there.
    """
    samples = [as_matrix(p) for p in p_samples]
    if samples:
        n = samples[0].shape[0]
    elif trials > 0:
        raise ValueError("need at least one sample to fix the dimension")
    else:
        return CheckReport()
    rng = np.random.Generator(np.random.PCG64(seed))
    while len(samples) < trials:
        samples.append(random_rank1_idempotent(n, rng))
    qs = coordinate_projectors(n)
    report = CheckReport()
    for s_idx, p in enumerate(samples):
        for j in range(n):
            for l in range(j + 1, n):
                value = kks_bracket(p, qs[j], qs[l])
                if value != 0:
                    report.add("kks_bracket", (s_idx, j, l), abs(value))
    report.details["cross_factor_brackets"] = "identically zero (independent variables)"
    return report
