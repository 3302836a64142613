"""Tests for the symplectic validation toolkit."""

import numpy as np
import pytest

from unbiased.errors import SingularMatrix
from unbiased.symplectic import (
    CotangentPoint,
    TangentPair,
    integrable_commute_check,
    kks_bracket,
    moment_sum,
    omega_X,
    omega_Y,
    phi_differential,
    phi_embed,
    project_momentum,
    pullback_symplectic_check,
    random_constraint_tangent,
    random_cotangent_point,
    random_orthogonal_tuple,
    random_rank1_idempotent,
    rank_k_lemma_check,
    tangent_constraint_deviation,
)
from unbiased.verify import coordinate_projectors

E12 = np.array([[0, 1], [0, 0]], dtype=complex)
E21 = np.array([[0, 0], [1, 0]], dtype=complex)


class TestMomentSum:
    def test_complete_system_vanishes(self):
        qs = coordinate_projectors(3)
        assert np.allclose(moment_sum(qs, np.eye(3)), 0.0)

    def test_single_projector(self):
        q1 = coordinate_projectors(2)[0]
        assert np.allclose(moment_sum([q1], q1), 0.0)

    def test_entrywise(self):
        ps = [coordinate_projectors(2)[0], np.array([[1, 1], [0, 0]], dtype=complex)]
        assert np.allclose(moment_sum(ps, np.eye(2)), [[1, 1], [0, -1]])


class TestRankKLemma:
    def test_orthogonal_pair(self):
        assert rank_k_lemma_check([np.diag([1.0, 0, 0]), np.diag([0, 1.0, 0])]) == (True, True)

    def test_non_orthogonal_pair(self):
        # S = [[2,1],[0,0]], S^2 = [[4,2],[0,0]] != S
        ps = [np.array([[1, 0], [0, 0]], dtype=complex),
              np.array([[1, 1], [0, 0]], dtype=complex)]
        assert rank_k_lemma_check(ps) == (False, False)

    def test_complement_pair(self):
        rng = np.random.Generator(np.random.PCG64(2))
        for _ in range(10):
            p = random_rank1_idempotent(2, rng)
            assert rank_k_lemma_check([p, np.eye(2) - p]) == (True, True)

    def test_biconditional_seeded(self):
        rng = np.random.Generator(np.random.PCG64(5))
        for n in (2, 3, 4):
            for k in range(1, n + 1):
                for trial in range(25):
                    good = random_orthogonal_tuple(n, k, 1000 * n + 37 * k + trial)
                    assert rank_k_lemma_check(good) == (True, True)
                    bad = [random_rank1_idempotent(n, rng) for _ in range(k)]
                    s, o = rank_k_lemma_check(bad)
                    assert s == o


class TestPhiEmbed:
    def test_zero_section(self):
        pt = random_cotangent_point(3, 1)
        pt0 = CotangentPoint(g=pt.g, A=np.zeros((3, 3)))
        from unbiased.linalg import invert
        ginv = invert(pt.g)
        rs = phi_embed(pt0)
        for i, r in enumerate(rs):
            assert np.allclose(r, np.outer(pt.g[:, i], ginv[i, :]), atol=1e-12)

    def test_identity_with_offdiagonal_momentum(self):
        a, b = 0.8, -0.3
        pt = CotangentPoint(g=np.eye(2), A=np.array([[0, a], [b, 0]], dtype=complex))
        rs = phi_embed(pt)
        assert np.allclose(rs[0], [[1, a], [0, 0]], atol=1e-14)
        assert np.linalg.norm(rs[0] @ rs[0] - rs[0]) < 1e-14

    def test_idempotency_random(self):
        for seed in range(5):
            pt = random_cotangent_point(4, 20 + seed)
            for r in phi_embed(pt):
                assert np.linalg.norm(r @ r - r, 2) < 1e-10

    def test_rank_one(self):
        from unbiased.linalg import singular_spectrum
        pt = random_cotangent_point(3, 33)
        for r in phi_embed(pt):
            assert singular_spectrum(r, tol=1e-8).rank == 1

    def test_t_invariance(self):
        pt = random_cotangent_point(3, 7)
        t = np.diag([1.5 + 0.2j, 0.3 - 1.0j, 2.0])
        moved = CotangentPoint(g=pt.g @ np.linalg.inv(t), A=t @ pt.A)
        for a, b in zip(phi_embed(pt), phi_embed(moved)):
            assert np.max(np.abs(a - b)) < 1e-10

    def test_constraint_violation_rejected(self):
        pt = CotangentPoint(g=np.eye(2), A=np.array([[1.0, 0], [0, 0]], dtype=complex))
        with pytest.raises(ValueError):
            phi_embed(pt)


class TestPhiDifferential:
    def test_zero_direction(self):
        pt = random_cotangent_point(3, 2)
        t = TangentPair(dg=np.zeros((3, 3)), dA=np.zeros((3, 3)))
        for d in phi_differential(pt, t):
            assert np.allclose(d, 0.0)

    def test_matrix_unit_direction(self):
        # at g = 1, A = 0, direction dg = E12: the product rule gives
        # dr_1 = -E12 and dr_2 = +E12 (frozen against central differences)
        pt = CotangentPoint(g=np.eye(2), A=np.zeros((2, 2)))
        t = TangentPair(dg=E12, dA=np.zeros((2, 2)))
        drs = phi_differential(pt, t)
        assert np.allclose(drs[0], -E12, atol=1e-14)
        assert np.allclose(drs[1], E12, atol=1e-14)

    def test_finite_difference_agreement(self):
        rng = np.random.Generator(np.random.PCG64(4))
        for seed in range(3):
            pt = random_cotangent_point(3, 40 + seed)
            t = random_constraint_tangent(pt, rng)
            h = 1e-6

            def embed_at(s):
                g = pt.g + s * t.dg
                a = project_momentum(g, pt.A + s * t.dA)
                return phi_embed(CotangentPoint(g=g, A=a))

            numeric = [(p - m) / (2 * h) for p, m in zip(embed_at(h), embed_at(-h))]
            analytic = phi_differential(pt, t)
            worst = max(np.max(np.abs(x - y)) for x, y in zip(numeric, analytic))
            assert worst < 1e-6


class TestForms:
    def test_omega_x_antisymmetry(self):
        rng = np.random.Generator(np.random.PCG64(6))
        pt = random_cotangent_point(2, 3)
        t1 = random_constraint_tangent(pt, rng)
        t2 = random_constraint_tangent(pt, rng)
        assert omega_X(t1, t1) == 0
        assert omega_X(t1, t2) == pytest.approx(-omega_X(t2, t1))

    def test_omega_x_matrix_units(self):
        t1 = TangentPair(dg=np.zeros((2, 2)), dA=E12)
        t2 = TangentPair(dg=E21, dA=np.zeros((2, 2)))
        assert omega_X(t1, t2) == pytest.approx(1.0)

    def test_omega_y_matrix_units(self):
        r = np.array([[1, 0], [0, 0]], dtype=complex)
        assert omega_Y([r], [E12], [E21]) == pytest.approx(1.0)
        assert omega_Y([r], [E12], [E12]) == 0
        assert omega_Y([r], [E21], [E12]) == pytest.approx(-1.0)


class TestPullback:
    def test_zero_section_identity_base(self):
        pt = CotangentPoint(g=np.eye(3), A=np.zeros((3, 3)))
        report = pullback_symplectic_check(pt, trials=50, seed=0, tol=1e-10)
        assert report.passed

    @pytest.mark.parametrize("n", [2, 3, 4])
    def test_random_points(self, n):
        for seed in range(3):
            pt = random_cotangent_point(n, 60 + seed)
            report = pullback_symplectic_check(pt, trials=30, seed=seed, tol=1e-8)
            assert report.passed, f"deviation {report.max_deviation}"

    def test_tangent_sampling_satisfies_constraint(self):
        rng = np.random.Generator(np.random.PCG64(9))
        pt = random_cotangent_point(4, 11)
        for _ in range(10):
            t = random_constraint_tangent(pt, rng)
            assert tangent_constraint_deviation(pt, t) < 1e-12

    def test_violated_constraint_precondition(self):
        pt = CotangentPoint(g=np.eye(2), A=np.diag([1.0, -1.0]))
        with pytest.raises(ValueError):
            pullback_symplectic_check(pt, trials=1, seed=0)

    def test_degenerate_shift_guard(self):
        # strictly off-diagonal A satisfies the constraint at g = identity;
        # with ab = 1 the shift 1 + A is exactly singular
        a = np.array([[0, 2.0], [0.5, 0]], dtype=complex)
        pt = CotangentPoint(g=np.eye(2), A=a)
        assert pt.constraint_deviation() == 0
        with pytest.raises(SingularMatrix):
            phi_embed(pt)


class TestIsotropyEvidence:
    def test_family_tangents_isotropic(self):
        # null directions of the Hessian at an n=4 family point induce
        # aggregate-projector motions on which the orbit form collapses by
        # orders of magnitude relative to generic orbit directions
        from unbiased.potential import hessian_slice, uniform_weights
        from unbiased.solver import SolveConfig, multistart
        from unbiased.symplectic import aggregate_isotropy_evidence

        recs = multistart(4, uniform_weights(4), SolveConfig(starts=40, seed=2))
        rec = next(r for r in recs if r.nullity >= 2)
        hess = hessian_slice(rec.slice_point, uniform_weights(4))
        _, svals, vh = np.linalg.svd(hess)
        null_dirs = vh[svals < 1e-6 * svals[0]].conj()
        assert len(null_dirs) >= 2
        for k in (2, 3):
            ev = aggregate_isotropy_evidence(rec.slice_point.embed(), null_dirs, k)
            assert ev.reference_scale > 1e-2
            assert ev.max_pairing < 1e-4 * ev.reference_scale
            payload = ev.to_json()
            assert payload["k"] == k and payload["directions"] == len(null_dirs)


class TestBrackets:
    def test_diagonal_pair_zero(self):
        rng = np.random.Generator(np.random.PCG64(10))
        p = random_rank1_idempotent(3, rng)
        assert kks_bracket(p, np.diag([1.0, 2.0, 3.0]), np.diag([4.0, 5.0, 6.0])) == 0

    def test_matrix_units(self):
        assert kks_bracket(np.diag([1.0, 0.0]), E12, E21) == pytest.approx(1.0)

    def test_equal_arguments(self):
        rng = np.random.Generator(np.random.PCG64(12))
        p = random_rank1_idempotent(2, rng)
        m = rng.standard_normal((2, 2)) + 1j * rng.standard_normal((2, 2))
        assert kks_bracket(p, m, m) == 0

    def test_commute_check_exact(self):
        rng = np.random.Generator(np.random.PCG64(13))
        samples = [random_rank1_idempotent(3, rng) for _ in range(50)]
        report = integrable_commute_check(samples)
        assert report.passed

    def test_nondiagonal_substitute_detected(self):
        # replacing a coordinate projector by a non-diagonal matrix breaks
        # commutation generically
        rng = np.random.Generator(np.random.PCG64(14))
        p = random_rank1_idempotent(2, rng)
        q1 = coordinate_projectors(2)[0]
        value = kks_bracket(p, q1, E12)
        assert abs(value) > 1e-8
