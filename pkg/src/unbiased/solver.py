"""Multi-start Newton solver for critical points on the gauge slice.

The system solved is "free components of grad_F = 0" in the (n-1)^2 free
slice coordinates, treated as a holomorphic square system. Newton runs in
logarithmic torus coordinates u = log g: the system becomes the bounded
unbiasedness form  g[r,c] * dF/dg[r,c] = L[c,r] - g[r,c]*ginv[c,r]  whose
Jacobian follows from the analytic Hessian by the chain rule. The raw
g-coordinate gradient decays to zero as entries blow up, so Newton on it
drifts to spurious roots at infinity; the log form has no such roots, and it
keeps iterates off the coordinate hyperplanes by construction.

Steps are damped least-squares Newton steps; the least-squares solve keeps
iterations stable when the Hessian is singular, which is exactly what happens
on positive-dimensional families of critical points. Acceptance is always
measured on the inversion-free critical-equation residual, re-checked
independently of the line search.
"""

from __future__ import annotations

from concurrent.futures import ProcessPoolExecutor
from dataclasses import dataclass, replace

import numpy as np

from .errors import NoConvergence, SingularMatrix, ZeroEntry
from .linalg import SpectrumReport, as_matrix, fourier_matrix, random_torus_matrix, singular_spectrum
from .potential import (
    GaugeSlicePoint,
    WeightMatrix,
    critical_residual,
    hessian_slice,
    potential_power,
    slice_gradient,
)

# Entries of the iterate may not come closer to a coordinate hyperplane than
# this; the potential is undefined there. The same bound caps entry moduli
# from above (at its reciprocal) in log coordinates.
ENTRY_FLOOR = 1e-8
# Smallest admissible backtracking factor before the step is declared collapsed.
STEP_FLOOR = 2.0 ** -20
# Relative singular-value cutoff for the least-squares Newton step.
LSTSQ_RCOND = 1e-8
# Cap on the max-norm of a log-coordinate step: one iteration may scale an
# entry by at most exp(STEP_CAP).
STEP_CAP = 4.0
_LOG_BOUND = -np.log(ENTRY_FLOOR)


@dataclass(frozen=True)
class SolveConfig:
    """Knobs for a multi-start run. All tolerances are positive.

    fourier_starts adds seeded starts drawn as multiplicative perturbations of
    the Fourier matrix (scale fourier_scale), which is itself a critical point
    for uniform weights; include_fourier adds the unperturbed Fourier start.
    """

    starts: int = 100
    seed: int = 0
    max_iterations: int = 100
    residual_tolerance: float = 1e-11
    step_damping: float = 0.5
    nullity_tolerance: float = 1e-6
    cluster_tolerance: float = 1e-6
    modulus_range: tuple = (0.5, 2.0)
    fourier_starts: int = 0
    fourier_scale: float = 0.1
    include_fourier: bool = False
    workers: int = 1

    def __post_init__(self):
        if self.starts < 0 or self.fourier_starts < 0:
            raise ValueError("start counts must be non-negative")
        if self.max_iterations < 1:
            raise ValueError("max_iterations must be positive")
        for name in ("residual_tolerance", "nullity_tolerance", "cluster_tolerance", "fourier_scale"):
            if getattr(self, name) <= 0:
                raise ValueError(f"{name} must be positive")
        if not (0.0 < self.step_damping < 1.0):
            raise ValueError("step_damping must lie in (0, 1)")
        low, high = self.modulus_range
        if not (0 < low <= high):
            raise ValueError(f"invalid modulus range {self.modulus_range!r}")


@dataclass(frozen=True)
class CriticalPointRecord:
    """A converged critical point with its classification data.

    potential_power stores det(g)**n / prod(g_ij) (the single-valued n-th
    power of the potential E for uniform weights); nullity is the Hessian
    nullity at the solution and doubles as the local family-dimension
    estimate.
    """

    slice_point: GaugeSlicePoint
    residual_norm: float
    potential_power: complex
    hessian_spectrum: SpectrumReport
    nullity: int
    basin_count: int
    canonical_key: tuple
    iterations: int = 0


@dataclass(frozen=True)
class FamilyProbeReport:
    """Evidence about the local dimension of a family of critical points.

    nullity is the estimated dimension; traceable_directions counts Hessian
    null directions along which a predictor-corrector step re-converged to a
    distinct critical point. A positive nullity with zero traceable directions
    is flagged as an unconfirmed degeneracy, never as a confirmed family.
    """

    nullity: int
    traceable_directions: int
    trace_distances: tuple
    flag: str | None

    @property
    def confirmed(self) -> bool:
        return self.nullity > 0 and self.traceable_directions > 0


def regauge(g) -> GaugeSlicePoint:
    """Rescale rows and columns so the first row and column become 1.

    g'[i, j] = g[i, j] * g[0, 0] / (g[i, 0] * g[0, j]); idempotent on points
    already on the slice (exactly, in floating point).
    """
    g = as_matrix(g)
    for j in range(g.shape[1]):
        if g[0, j] == 0:
            raise ZeroEntry((0, j))
    for i in range(g.shape[0]):
        if g[i, 0] == 0:
            raise ZeroEntry((i, 0))
    scaled = g * (g[0, 0] / np.outer(g[:, 0], g[0, :]))
    return GaugeSlicePoint(n=g.shape[0], free_entries=scaled[1:, 1:])


def _spectrum_vector(record: CriticalPointRecord) -> np.ndarray:
    """Unrounded invariant vector used for clustering distances."""
    e = record.potential_power
    mag = abs(e)
    scaled = e * mag ** (1.0 / record.slice_point.n - 1.0) if mag > 0 else 0.0j
    mods = np.sort(np.abs(record.slice_point.embed()).ravel())
    return np.concatenate(
        [[scaled.real, scaled.imag], record.hessian_spectrum.values, mods]
    )


def _canonical_sign(re: float, im: float, odd: bool):
    """Resolve the relabeling sign ambiguity of the potential power for odd n.

    Permuting rows or columns multiplies det(g)**n by the permutation sign
    when n is odd, so the key keeps whichever of +/-(re, im) is
    lexicographically larger.
    """
    if odd:
        return max((re, im), (-re, -im))
    return (re, im)


def canonicalize(record: CriticalPointRecord, cluster_tolerance: float | None = None) -> tuple:
    """Clustering key: rounded invariants of the critical point.

    Built from the scale-normalized potential power, the Hessian singular
    values and the sorted entry-modulus multiset of the embedded matrix, each
    rounded to the cluster tolerance; invariant under simultaneous relabeling
    permutations of the projector systems followed by regauging.
    """
    if cluster_tolerance is None:
        cluster_tolerance = 1e-6
    vec = _spectrum_vector(record)
    q = [int(round(x / cluster_tolerance)) for x in vec]
    n = record.slice_point.n
    q[0], q[1] = _canonical_sign(q[0], q[1], odd=n % 2 == 1)
    return (n, *q)


def _key_distance(a: np.ndarray, b: np.ndarray, odd: bool) -> float:
    """Max-norm distance between invariant vectors, modulo the odd-n sign."""
    rest = float(np.max(np.abs(a[2:] - b[2:]))) if a.size > 2 else 0.0
    head = float(np.max(np.abs(a[:2] - b[:2])))
    if odd:
        head = min(head, float(np.max(np.abs(a[:2] + b[:2]))))
    return max(head, rest)


def _make_record(point: GaugeSlicePoint, w: WeightMatrix, cfg: SolveConfig,
                 residual: float, iterations: int) -> CriticalPointRecord:
    g = point.embed()
    spectrum = singular_spectrum(hessian_slice(point, w), tol=cfg.nullity_tolerance)
    record = CriticalPointRecord(
        slice_point=point,
        residual_norm=residual,
        potential_power=potential_power(g),
        hessian_spectrum=spectrum,
        nullity=spectrum.nullity,
        basin_count=1,
        canonical_key=(),
        iterations=iterations,
    )
    return replace(record, canonical_key=canonicalize(record, cfg.cluster_tolerance))


def _guards_ok(g: np.ndarray) -> bool:
    """Iterate stays away from coordinate hyperplanes and the singular locus.

    The determinant guard is scale-invariant: |det g| relative to the product
    of row norms (its Hadamard bound) must clear the pivot-floor scale.
    """
    if np.min(np.abs(g)) < ENTRY_FLOOR:
        return False
    hadamard = float(np.prod(np.linalg.norm(g, axis=1)))
    return abs(np.linalg.det(g)) > 1e-12 * hadamard


def _log_system(point: GaugeSlicePoint, w: WeightMatrix):
    """Gradient and Jacobian of F in log coordinates u[r,c] = log g[r,c].

    dF/du = v * dF/dg entrywise (v = free entries), and the chain rule turns
    the analytic Hessian H into diag(v) H diag(v) + diag(v * dF/dg).
    """
    v = point.free_vector()
    grad = slice_gradient(point, w)
    hess = hessian_slice(point, w)
    log_grad = v * grad
    log_jac = (hess * v[None, :]) * v[:, None]
    log_jac[np.diag_indices_from(log_jac)] += log_grad
    return log_grad, log_jac


def _merit(point: GaugeSlicePoint, w: WeightMatrix) -> float:
    """Line-search merit: norm of the log-coordinate gradient."""
    return float(np.linalg.norm(point.free_vector() * slice_gradient(point, w)))


def newton_solve(start: GaugeSlicePoint, w: WeightMatrix, cfg: SolveConfig) -> CriticalPointRecord:
    """Damped least-squares Newton (in log coordinates) from one start point.

    Accepts when the critical-equation residual norm drops below
    cfg.residual_tolerance; raises NoConvergence on iteration exhaustion, step
    collapse, or wandering to the entry/determinant floor.
    """
    n = start.n
    v0 = start.free_vector()
    if np.any(v0 == 0):
        raise NoConvergence("singularity floor", np.inf, 0)
    u = np.log(v0)
    resid = np.inf
    for it in range(cfg.max_iterations + 1):
        point = GaugeSlicePoint.from_free_vector(n, np.exp(u))
        g = point.embed()
        if not _guards_ok(g):
            raise NoConvergence("singularity floor", resid if np.isfinite(resid) else 0.0, it)
        resid, _ = critical_residual(g, w)
        if resid < cfg.residual_tolerance:
            return _make_record(point, w, cfg, resid, it)
        if it == cfg.max_iterations:
            raise NoConvergence("max iterations", resid, it)
        try:
            log_grad, log_jac = _log_system(point, w)
        except (SingularMatrix, ZeroEntry):
            raise NoConvergence("singularity floor", resid, it) from None
        step, *_ = np.linalg.lstsq(log_jac, -log_grad, rcond=LSTSQ_RCOND)
        biggest = float(np.max(np.abs(step)))
        if biggest > STEP_CAP:
            step *= STEP_CAP / biggest
        merit = float(np.linalg.norm(log_grad))
        lam = 1.0
        while True:
            trial = u + lam * step
            if float(np.max(np.abs(trial.real))) < _LOG_BOUND:
                trial_point = GaugeSlicePoint.from_free_vector(n, np.exp(trial))
                if _guards_ok(trial_point.embed()):
                    try:
                        if _merit(trial_point, w) <= (1.0 - 1e-4 * lam) * merit:
                            break
                    except (SingularMatrix, ZeroEntry):
                        pass
            lam *= cfg.step_damping
            if lam < STEP_FLOOR:
                raise NoConvergence("step collapse", resid, it)
        u = trial
    raise NoConvergence("max iterations", resid, cfg.max_iterations)


def _start_points(n: int, cfg: SolveConfig):
    """Deterministic start list: seeded torus draws, then Fourier variants."""
    starts = []
    for i in range(cfg.starts):
        starts.append(random_torus_matrix(n, cfg.seed + i, cfg.modulus_range))
    f = fourier_matrix(n)
    for j in range(cfg.fourier_starts):
        rng = np.random.Generator(np.random.PCG64(cfg.seed + cfg.starts + j))
        noise = rng.uniform(-1.0, 1.0, (n, n)) + 1j * rng.uniform(-1.0, 1.0, (n, n))
        starts.append(f * np.exp(cfg.fourier_scale * noise))
    if cfg.include_fourier:
        starts.append(f.copy())
    return starts


def _solve_one(args):
    n, w_entries, cfg, g0 = args
    w = WeightMatrix(k=n, n=n, entries=w_entries)
    try:
        point = regauge(g0)
        return newton_solve(point, w, cfg)
    except (NoConvergence, ZeroEntry, SingularMatrix):
        return None


def multistart(n: int, w: WeightMatrix, cfg: SolveConfig) -> list:
    """Run all configured starts, cluster the converged records, sort by key.

    basin_count of each returned record is the number of converged starts in
    its cluster; the output order (ascending canonical key) and contents are
    deterministic for a fixed seed, independent of worker scheduling.
    """
    jobs = [(n, w.entries, cfg, g0) for g0 in _start_points(n, cfg)]
    if cfg.workers > 1 and len(jobs) > 1:
        with ProcessPoolExecutor(max_workers=cfg.workers) as pool:
            results = list(pool.map(_solve_one, jobs, chunksize=8))
    else:
        results = [_solve_one(job) for job in jobs]
    records = [r for r in results if r is not None]
    return cluster_records(records, cfg)


def cluster_records(records: list, cfg: SolveConfig) -> list:
    """Group records by canonical key, merging boundary-straddling keys.

    Two clusters whose unrounded invariant vectors are within the cluster
    tolerance are the same solution that happened to round to different grid
    cells, so they are unioned before representatives are chosen.
    """
    if not records:
        return []
    by_key: dict = {}
    for r in records:
        by_key.setdefault(r.canonical_key, []).append(r)
    keys = sorted(by_key)
    vecs = [_spectrum_vector(by_key[k][0]) for k in keys]
    odd = records[0].slice_point.n % 2 == 1
    parent = list(range(len(keys)))

    def find(i):
        while parent[i] != i:
            parent[i] = parent[parent[i]]
            i = parent[i]
        return i

    if len(keys) <= 4000:
        for i in range(len(keys)):
            for j in range(i + 1, len(keys)):
                if _key_distance(vecs[i], vecs[j], odd) <= cfg.cluster_tolerance:
                    parent[find(j)] = find(i)
    clusters: dict = {}
    for idx, key in enumerate(keys):
        clusters.setdefault(find(idx), []).extend(by_key[key])
    out = []
    for members in clusters.values():
        rep = min(members, key=lambda r: (r.canonical_key, r.residual_norm))
        out.append(replace(rep, basin_count=len(members)))
    out.sort(key=lambda r: r.canonical_key)
    return out


def family_probe(record: CriticalPointRecord, w: WeightMatrix, cfg: SolveConfig,
                 trace_step: float | None = None) -> FamilyProbeReport:
    """Predictor-corrector evidence that a Hessian nullity is a real family.

    For each null direction of the Hessian, steps away from the solution and
    re-converges; a direction counts as traceable when the corrected point is
    a critical point at distance >= 10 * cluster_tolerance from the original.
    """
    if trace_step is None:
        trace_step = 100.0 * cfg.cluster_tolerance
    point = record.slice_point
    n = point.n
    hess = hessian_slice(point, w)
    _, svals, vh = np.linalg.svd(hess)
    null_mask = svals < cfg.nullity_tolerance * (svals[0] if svals[0] > 0 else 1.0)
    directions = vh[null_mask].conj()
    v0 = point.free_vector()
    corrector_cfg = replace(cfg, max_iterations=30)
    traced = []
    for u in directions:
        best = 0.0
        for sign in (1.0, -1.0):
            start = GaugeSlicePoint.from_free_vector(n, v0 + sign * trace_step * u)
            try:
                moved = newton_solve(start, w, corrector_cfg)
            except (NoConvergence, ZeroEntry, SingularMatrix):
                continue
            dist = float(np.linalg.norm(moved.slice_point.free_vector() - v0))
            best = max(best, dist)
            if best >= 10.0 * cfg.cluster_tolerance:
                break
        traced.append(best)
    traceable = sum(1 for d in traced if d >= 10.0 * cfg.cluster_tolerance)
    flag = None
    if record.nullity > 0 and traceable == 0:
        flag = "unconfirmed degeneracy"
    return FamilyProbeReport(
        nullity=record.nullity,
        traceable_directions=traceable,
        trace_distances=tuple(traced),
        flag=flag,
    )
