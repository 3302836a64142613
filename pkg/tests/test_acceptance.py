"""Acceptance suite: one test per criterion, one pass/fail line each.

Run with `pytest tests/test_acceptance.py -v -s` to see the per-criterion
lines. The family-detection criteria for n = 6 and n = 7 consume their start
budget in chunks and stop early once a qualifying cluster appears; if the
budget is exhausted without one they report "not reached" and skip rather
than silently passing.
"""

import json
import time
from math import factorial

import numpy as np
import pytest

from unbiased.birkhoff import (
    facet_enumerate,
    lattice_points_enumerate,
    newton_polytope_of_E,
    permutation_vertices,
    reflexive_check,
    terminal_check,
)
from unbiased.linalg import fourier_matrix, invert, random_torus_matrix
from unbiased.potential import (
    GaugeSlicePoint,
    WeightMatrix,
    critical_residual,
    grad_F,
    hessian_slice,
    log_potential,
    slice_gradient,
    uniform_weights,
)
from unbiased.serialize import records_to_json
from unbiased.solver import SolveConfig, family_probe, multistart, regauge
from unbiased.symplectic import (
    integrable_commute_check,
    kks_bracket,
    pullback_symplectic_check,
    random_cotangent_point,
    random_orthogonal_tuple,
    random_rank1_idempotent,
    rank_k_lemma_check,
)
from unbiased.verify import (
    ProjectorSystem,
    check_psi_pushforward,
    check_unbiased_pair,
    coordinate_projectors,
    projectors_from_transition,
)


def report(number, name, detail):
    print(f"\nACCEPTANCE {number} {name}: PASS — {detail}")


def budget_search(n, target_nullity, budget=5000, chunk=500, fourier_chunk=100, seed=1):
    """Spend the start budget in chunks, stopping at the first qualifying
    cluster; chunk seeds tile the same range a single full run would use."""
    w = uniform_weights(n)
    used = 0
    best = None
    while used < budget:
        size = min(chunk, budget - used)
        cfg = SolveConfig(starts=size, seed=seed + used,
                          fourier_starts=fourier_chunk if used == 0 else 0)
        for rec in multistart(n, w, cfg):
            if best is None or rec.nullity > best.nullity:
                best = rec
        used += size
        if best is not None and best.nullity >= target_nullity:
            break
    return best, used


def test_criterion_1_n2_exact_reproduction():
    t0 = time.time()
    records = multistart(2, uniform_weights(2), SolveConfig(starts=100, seed=1))
    elapsed = time.time() - t0
    assert len(records) == 1
    rec = records[0]
    x = rec.slice_point.free_entries[0, 0]
    assert abs(x - (-1.0)) < 1e-10
    assert abs(rec.potential_power - (-4.0)) < 1e-10
    assert rec.nullity == 0
    assert elapsed < 1.0
    report(1, "n=2 exact reproduction",
           f"one cluster at x={x:.12g}, E^2={rec.potential_power:.12g}, "
           f"nullity 0, {elapsed:.2f}s")


def test_criterion_2_fourier_criticality():
    t0 = time.time()
    worst_resid, worst_pair = 0.0, 0.0
    for n in range(2, 9):
        f = fourier_matrix(n)
        # closed-form inverse oracle: g^{-1} = g^dagger / n
        assert np.max(np.abs(invert(f) - f.conj().T / n)) < 1e-12
        norm, _ = critical_residual(f, uniform_weights(n))
        worst_resid = max(worst_resid, norm)
        assert norm < 1e-11
        rep = check_unbiased_pair(f, uniform_weights(n), tol=1e-10)
        assert rep.passed
    elapsed = time.time() - t0
    assert elapsed < 1.0
    report(2, "Fourier criticality n=2..8",
           f"max residual {worst_resid:.2e}, unbiased checks pass at 1e-10, {elapsed:.2f}s")


@pytest.mark.parametrize("n,budget_seconds", [(3, 60.0), (5, 600.0)])
def test_criterion_3_finiteness_evidence(n, budget_seconds):
    t0 = time.time()
    records = multistart(n, uniform_weights(n), SolveConfig(starts=2000, seed=1))
    elapsed = time.time() - t0
    assert records
    nullities = [r.nullity for r in records]
    assert all(v == 0 for v in nullities)
    assert elapsed < budget_seconds
    converged = sum(r.basin_count for r in records)
    report(3, f"finiteness evidence n={n}",
           f"{len(records)} clusters (count reported, not gated), all nullity 0, "
           f"{converged}/2000 starts converged, {elapsed:.1f}s")


def test_criterion_4_family_n4():
    t0 = time.time()
    cfg = SolveConfig(starts=200, seed=1, include_fourier=True)
    records = multistart(4, uniform_weights(4), cfg)
    family = [r for r in records if r.nullity >= 1]
    assert family, "no cluster with positive nullity found"
    confirmed = None
    for rec in family[:10]:
        probe = family_probe(rec, uniform_weights(4), cfg)
        if probe.traceable_directions >= 1:
            confirmed = (rec, probe)
            break
    elapsed = time.time() - t0
    assert confirmed is not None, "no traceable null direction"
    assert elapsed < 300.0
    rec, probe = confirmed
    report(4, "family detection n=4",
           f"cluster with nullity {rec.nullity}, {probe.traceable_directions} traceable "
           f"direction(s), max trace distance {max(probe.trace_distances):.2e}, {elapsed:.1f}s")


def test_criterion_5_family_n6():
    t0 = time.time()
    best, used = budget_search(6, target_nullity=4)
    elapsed = time.time() - t0
    if best is None or best.nullity < 4:
        print(f"\nACCEPTANCE 5 family detection n=6: not reached — increase budget "
              f"(best nullity {best.nullity if best else 'none'} after {used} starts)")
        pytest.skip("not reached — increase budget")
    assert check_unbiased_pair(best.slice_point.embed(), uniform_weights(6), tol=1e-9).passed
    assert elapsed < 1800.0
    report(5, "family detection n=6",
           f"cluster with nullity {best.nullity} after {used} starts, {elapsed:.1f}s")


def test_criterion_6_family_n7():
    t0 = time.time()
    best, used = budget_search(7, target_nullity=1)
    elapsed = time.time() - t0
    if best is None or best.nullity < 1:
        print(f"\nACCEPTANCE 6 family detection n=7: not reached — increase budget "
              f"(best nullity {best.nullity if best else 'none'} after {used} starts)")
        pytest.skip("not reached — increase budget")
    assert check_unbiased_pair(best.slice_point.embed(), uniform_weights(7), tol=1e-9).passed
    assert elapsed < 1800.0
    report(6, "family detection n=7",
           f"cluster with nullity {best.nullity} after {used} starts, {elapsed:.1f}s")


def test_criterion_7_symplectic_embedding():
    t0 = time.time()
    worst = 0.0
    for n in (2, 3, 4):
        for point_idx in range(20):
            pt = random_cotangent_point(n, 10_000 * n + point_idx)
            rep = pullback_symplectic_check(pt, trials=100, seed=point_idx, tol=1e-8)
            worst = max(worst, rep.max_deviation)
    elapsed = time.time() - t0
    assert worst < 1e-8
    assert elapsed < 60.0
    report(7, "symplectic embedding",
           f"max pullback deviation {worst:.2e} over 20 points x 100 pairs, "
           f"n in {{2,3,4}}, {elapsed:.1f}s")


def test_criterion_8_rank_k_lemma():
    t0 = time.time()
    rng = np.random.Generator(np.random.PCG64(2024))
    instances = 0
    for n in range(2, 7):
        for k in range(1, n + 1):
            for trial in range(500):
                good = random_orthogonal_tuple(n, k, 100_000 * n + 1_000 * k + trial)
                assert rank_k_lemma_check(good, tol=1e-8) == (True, True)
                bad = [random_rank1_idempotent(n, rng) for _ in range(k)]
                s_proj, orth = rank_k_lemma_check(bad, tol=1e-8)
                assert s_proj == orth
                instances += 2
    elapsed = time.time() - t0
    assert elapsed < 60.0
    report(8, "rank-k lemma biconditional",
           f"{instances} instances across n<=6, k<=n, zero counterexamples, {elapsed:.1f}s")


def test_criterion_9_integrable_commutation():
    t0 = time.time()
    rng = np.random.Generator(np.random.PCG64(77))
    for n in range(2, 7):
        qs = coordinate_projectors(n)
        samples = [random_rank1_idempotent(n, rng) for _ in range(20)]
        rep = integrable_commute_check(samples)
        assert rep.passed
        for p in samples[:5]:
            for j in range(n):
                for l in range(n):
                    assert kks_bracket(p, qs[j], qs[l]) == 0  # bitwise zero
    elapsed = time.time() - t0
    assert elapsed < 1.0
    report(9, "integrable-system commutation",
           f"all brackets bitwise zero for n<=6, {elapsed:.2f}s")


def test_criterion_10_psi_homomorphism():
    t0 = time.time()
    for n in range(2, 9):
        f = fourier_matrix(n)
        system = projectors_from_transition(f)
        assert check_psi_pushforward(system, uniform_weights(n), tol=1e-9).passed
        for k in range(1, n):
            sub = ProjectorSystem(n=n, members=system.members[:k], tolerance=1e-9)
            w = WeightMatrix(k=k, n=n, entries=np.full((k, n), 1.0 / n, dtype=complex))
            assert check_psi_pushforward(sub, w, tol=1e-9).passed
    elapsed = time.time() - t0
    assert elapsed < 1.0
    report(10, "psi homomorphism relations",
           f"aggregate relations pass at 1e-9 for all n<=8 and sub-systems k<n, {elapsed:.2f}s")


def test_criterion_11_birkhoff_certificates():
    t0 = time.time()
    for n in (2, 3, 4):
        ok, cert = reflexive_check(n)
        assert ok
        assert terminal_check(n)
        assert len(lattice_points_enumerate(n)) == factorial(n) + 1
        assert len(facet_enumerate(n)) == (n * n if n >= 3 else 2)
        signed = newton_polytope_of_E(n)
        assert {p.entries for _, p in signed} == {v.entries for v in permutation_vertices(n)}
    assert len(lattice_points_enumerate(5)) == factorial(5) + 1
    elapsed = time.time() - t0
    assert elapsed < 60.0
    report(11, "Birkhoff certificates",
           f"reflexive+terminal for n in {{2,3,4}}, n!+1 lattice points up to n=5, "
           f"Newton polytope matches exactly, {elapsed:.1f}s")


def test_criterion_12_property_suites():
    t0 = time.time()
    rng = np.random.Generator(np.random.PCG64(55))
    # gradient vs finite differences of the logarithmic potential (1e-6)
    w3 = uniform_weights(3)
    for _ in range(3):
        g = np.ones((3, 3), dtype=complex) + 0.5 * np.eye(3) \
            + 0.05 * (rng.standard_normal((3, 3)) + 1j * rng.standard_normal((3, 3)))
        direction = rng.standard_normal((3, 3)) + 1j * rng.standard_normal((3, 3))
        h = 1e-5
        fd = (log_potential(g + h * direction, w3) - log_potential(g - h * direction, w3)) / (2 * h)
        assert abs(fd - np.trace(grad_F(g, w3).entries @ direction)) < 1e-6
    # Hessian symmetry (1e-10)
    for n in (2, 3, 4):
        free = np.exp(rng.uniform(-0.3, 0.3, (n - 1, n - 1))
                      + 1j * rng.uniform(0, 2 * np.pi, (n - 1, n - 1)))
        p = GaugeSlicePoint(n, free)
        hess = hessian_slice(p, uniform_weights(n))
        assert np.max(np.abs(hess - hess.T)) < 1e-10
        # Hessian vs Jacobian of the free gradient (1e-6)
        m = (n - 1) ** 2
        v0 = p.free_vector()
        step = 1e-6
        for j in range(m):
            e = np.zeros(m, dtype=complex)
            e[j] = 1.0
            gp = slice_gradient(GaugeSlicePoint.from_free_vector(n, v0 + step * e), uniform_weights(n))
            gm = slice_gradient(GaugeSlicePoint.from_free_vector(n, v0 - step * e), uniform_weights(n))
            assert np.max(np.abs((gp - gm) / (2 * step) - hess[:, j])) < 1e-6
    # regauge idempotence (exact)
    for seed in range(5):
        p = regauge(random_torus_matrix(3, seed))
        assert np.array_equal(regauge(p.embed()).free_entries, p.free_entries)
    # determinism of seeded runs (byte-identical JSON)
    cfg = SolveConfig(starts=25, seed=9)
    a = json.dumps(records_to_json(multistart(2, uniform_weights(2), cfg)), sort_keys=True)
    b = json.dumps(records_to_json(multistart(2, uniform_weights(2), cfg)), sort_keys=True)
    assert a.encode() == b.encode()
    elapsed = time.time() - t0
    assert elapsed < 60.0
    report(12, "property suites",
           f"gradient FD, Hessian symmetry/Jacobian, regauge idempotence, "
           f"seeded determinism all green, {elapsed:.1f}s")
