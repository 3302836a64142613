"""Tests for the dense complex linear algebra core."""

import numpy as np
import pytest

from unbiased.errors import SingularMatrix
from unbiased.linalg import (
    ComplexSquareMatrix,
    as_matrix,
    det,
    fourier_matrix,
    invert,
    random_torus_matrix,
    singular_spectrum,
)


class TestDet:
    def test_identity(self):
        assert det(np.eye(3)) == pytest.approx(1.0)

    def test_2x2_cofactor(self):
        # cofactor arithmetic: 1*(-1) - 1*1 = -2
        assert det([[1, 1], [1, -1]]) == pytest.approx(-2.0)

    def test_repeated_rows(self):
        assert abs(det(np.ones((3, 3)))) < 1e-12

    def test_triangular_exact(self):
        t = np.triu(np.arange(1, 17, dtype=complex).reshape(4, 4))
        assert det(t) == pytest.approx(1 * 6 * 11 * 16)


class TestInvert:
    def test_identity(self):
        assert np.allclose(invert(np.eye(4)), np.eye(4))

    def test_2x2_formula(self):
        inv = invert([[1, 1], [1, -1]])
        assert np.allclose(inv, [[0.5, 0.5], [0.5, -0.5]], atol=1e-14)

    def test_all_ones_singular(self):
        with pytest.raises(SingularMatrix) as err:
            invert(np.ones((3, 3)))
        assert err.value.pivot_magnitude >= 0.0
        assert err.value.floor > 0.0

    def test_roundtrip_random(self):
        for seed in range(10):
            g = random_torus_matrix(5, seed)
            assert np.allclose(invert(invert(g)), g, rtol=1e-10, atol=1e-10)

    def test_det_of_inverse(self):
        for seed in range(10):
            g = random_torus_matrix(4, 100 + seed)
            assert det(invert(g)) * det(g) == pytest.approx(1.0, rel=1e-10)


class TestSpectrum:
    def test_identity(self):
        rep = singular_spectrum(np.eye(4), tol=1e-8)
        assert rep.rank == 4 and rep.nullity == 0

    def test_rank1_projector(self):
        rep = singular_spectrum(np.diag([1.0, 0.0, 0.0]), tol=1e-8)
        assert rep.rank == 1 and rep.nullity == 2

    def test_symmetric_rank1(self):
        # eigenvalues of [[1,1],[1,1]] are 2 and 0
        rep = singular_spectrum([[1, 1], [1, 1]], tol=1e-8)
        assert rep.values[0] == pytest.approx(2.0)
        assert rep.values[1] == pytest.approx(0.0, abs=1e-14)
        assert rep.rank == 1

    def test_sorted_descending(self):
        rep = singular_spectrum(random_torus_matrix(6, 3), tol=1e-8)
        assert all(a >= b for a, b in zip(rep.values, rep.values[1:]))
        assert rep.rank + rep.nullity == 6

    def test_zero_matrix_full_nullity(self):
        rep = singular_spectrum(np.zeros((3, 3)), tol=1e-8)
        assert rep.nullity == 3

    def test_conjugated_coordinate_projector_rank1(self):
        for seed in range(5):
            g = random_torus_matrix(4, 40 + seed)
            ginv = invert(g)
            for i in range(4):
                p = np.outer(g[:, i], ginv[i, :])
                assert singular_spectrum(p, tol=1e-8).rank == 1


class TestFourier:
    def test_n1(self):
        assert np.allclose(fourier_matrix(1), [[1.0]])

    def test_n2_hadamard(self):
        assert np.allclose(fourier_matrix(2), [[1, 1], [1, -1]], atol=1e-15)

    def test_n4_entry(self):
        assert fourier_matrix(4)[1, 1] == pytest.approx(1j)

    @pytest.mark.parametrize("n", range(1, 17))
    def test_unimodular_and_scaled_unitary(self, n):
        f = fourier_matrix(n)
        assert np.max(np.abs(np.abs(f) - 1.0)) < 1e-14
        assert np.max(np.abs(f @ f.conj().T / n - np.eye(n))) < 1e-12


class TestRandomTorus:
    def test_deterministic(self):
        a = random_torus_matrix(3, 7)
        b = random_torus_matrix(3, 7)
        assert np.array_equal(a, b)

    def test_modulus_range(self):
        m = random_torus_matrix(3, 7, (0.5, 2.0))
        mods = np.abs(m)
        assert np.all(mods >= 0.5) and np.all(mods <= 2.0)

    def test_seeds_differ(self):
        assert not np.array_equal(random_torus_matrix(3, 7), random_torus_matrix(3, 8))

    def test_bad_range(self):
        with pytest.raises(ValueError):
            random_torus_matrix(3, 7, (0.0, 1.0))


class TestWrapper:
    def test_validates_shape(self):
        with pytest.raises(ValueError):
            ComplexSquareMatrix(n=2, entries=np.zeros((2, 3)))

    def test_rejects_nan(self):
        bad = np.ones((2, 2), dtype=complex)
        bad[0, 0] = np.nan
        with pytest.raises(ValueError):
            ComplexSquareMatrix(n=2, entries=bad)

    def test_as_matrix_accepts_wrapper(self):
        m = ComplexSquareMatrix.from_array(np.eye(2))
        assert np.array_equal(as_matrix(m), np.eye(2))
