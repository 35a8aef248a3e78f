import numpy as np
import pytest

from toruskit.errors import (
    DegenerateFrameError,
    DimensionError,
    NoConvergenceError,
    NondegeneracyFailure,
)
from toruskit.numerics import (
    det,
    eigenvalues,
    match_spectra,
    newton_solve,
    orthonormal_complement,
    spectral_distance,
)


class TestDet:
    def test_identity(self):
        assert det(np.eye(3)) == 1.0

    def test_two_by_two_hand_value(self):
        assert det([[1.0, 2.0], [3.0, 4.0]]) == -2.0

    def test_equal_rows_singular(self):
        m = np.array([[1.0, 2.0, 3.0], [4.0, 5.0, 6.0], [1.0, 2.0, 3.0]])
        assert det(m) == 0.0

    def test_non_square_raises(self):
        with pytest.raises(DimensionError):
            det(np.ones((2, 3)))

    def test_product_rule(self, rng):
        for _ in range(30):
            a = rng.normal(size=(5, 5))
            b = rng.normal(size=(5, 5))
            lhs = det(a @ b)
            rhs = det(a) * det(b)
            assert abs(lhs - rhs) <= 1e-9 * max(1.0, abs(rhs))

    def test_against_numpy(self, rng):
        for k in range(1, 9):
            m = rng.normal(size=(k, k))
            assert det(m) == pytest.approx(np.linalg.det(m), rel=1e-10, abs=1e-12)


class TestEigenvalues:
    def test_diagonal(self):
        vals = eigenvalues(np.diag([2.0, 3.0]))
        assert np.allclose(vals, [2.0, 3.0])

    def test_planar_rotation(self):
        # characteristic polynomial lambda^2 - 2 cos(theta) lambda + 1
        th = np.pi / 3
        rot = np.array([[np.cos(th), -np.sin(th)], [np.sin(th), np.cos(th)]])
        vals = eigenvalues(rot)
        expected = np.array([np.exp(-1j * th), np.exp(1j * th)])
        assert spectral_distance(vals, expected) < 1e-12

    def test_identity_multiplicity(self):
        vals = eigenvalues(np.eye(4))
        assert np.allclose(vals, np.ones(4))

    def test_trace_consistency(self, rng):
        m = rng.normal(size=(8, 8))
        vals = eigenvalues(m)
        assert abs(vals.sum() - np.trace(m)) <= 1e-9 * (1 + abs(np.trace(m)))

    def test_transpose_same_spectrum(self, rng):
        for _ in range(10):
            m = rng.normal(size=(6, 6))
            assert spectral_distance(eigenvalues(m), eigenvalues(m.T)) < 1e-8

    def test_non_square_raises(self):
        with pytest.raises(DimensionError):
            eigenvalues(np.ones((3, 2)))


class TestOrthonormalComplement:
    def test_standard_basis(self):
        cols = np.eye(6)[:, :2]
        comp = orthonormal_complement(cols)
        assert comp.shape == (6, 4)
        assert np.max(np.abs(comp.T @ cols)) < 1e-12
        assert np.max(np.abs(comp.T @ comp - np.eye(4))) < 1e-12

    def test_full_span_empty(self):
        comp = orthonormal_complement(np.eye(4))
        assert comp.shape == (4, 0)

    def test_random_full_rank(self, rng):
        cols = rng.normal(size=(8, 3))
        comp = orthonormal_complement(cols)
        assert comp.shape == (8, 5)
        assert np.max(np.abs(comp.T @ cols)) < 1e-12
        assert np.max(np.abs(comp.T @ comp - np.eye(5))) < 1e-12

    def test_rank_deficient_raises(self):
        cols = np.column_stack((np.ones(4), 2.0 * np.ones(4)))
        with pytest.raises(DegenerateFrameError):
            orthonormal_complement(cols)


class TestNewtonSolve:
    def test_linear_identity(self):
        res = newton_solve(lambda y: y, np.array([0.3]), tol=1e-12)
        assert abs(res.y[0]) < 1e-12

    def test_sqrt_two(self):
        res = newton_solve(lambda y: y * y - 2.0, np.array([1.0]), tol=1e-12)
        assert res.y[0] == pytest.approx(np.sqrt(2.0), abs=1e-12)

    def test_constant_residual_degenerate(self):
        with pytest.raises(NondegeneracyFailure):
            newton_solve(lambda y: np.zeros(1), np.array([0.5]))

    def test_linear_system_two_iterations(self, rng):
        for _ in range(10):
            a = rng.normal(size=(4, 4)) + 4.0 * np.eye(4)
            b = rng.normal(size=4)
            res = newton_solve(lambda y: a @ y - b, rng.normal(size=4), tol=1e-10)
            assert res.iterations <= 2
            assert np.max(np.abs(a @ res.y - b)) < 1e-10

    def test_no_root_raises(self):
        # exp(-y) has no zero; Newton marches y -> y + 1 forever
        with pytest.raises(NoConvergenceError):
            newton_solve(lambda y: np.exp(-y), np.array([0.0]),
                         tol=1e-12, max_iter=8)

    def test_returns_jacobian(self):
        res = newton_solve(lambda y: 3.0 * y - 1.0, np.array([0.0]), tol=1e-12)
        assert res.jacobian == pytest.approx(np.array([[3.0]]), rel=1e-6)


class TestSpectraMatching:
    def test_exact_match(self):
        a = np.array([1.0 + 1j, 2.0, 3.0 - 1j])
        pairs, worst = match_spectra(a, a[::-1])
        assert worst == 0.0
        assert len(pairs) == 3

    def test_distance(self):
        a = np.array([1.0, 1.0j])
        b = np.array([1.0 + 1e-3, 1.0j])
        assert spectral_distance(a, b) == pytest.approx(1e-3, rel=1e-9)

    def test_size_mismatch(self):
        with pytest.raises(DimensionError):
            match_spectra([1.0], [1.0, 2.0])
