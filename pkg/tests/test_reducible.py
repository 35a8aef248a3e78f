import numpy as np
import pytest

from toruskit.errors import SingularFrequencyMatrixError
from toruskit.reducible import (
    FrequencyData,
    compute_Q,
    determinant_criterion,
    lyapunov_specialization,
    search_alpha,
)

SQRT2 = np.sqrt(2.0)


def system_c_data(omega=1.0, nu=SQRT2):
    return FrequencyData(np.array([[omega, omega], [-1.0, 1.0]]),
                         np.array([[nu], [0.0]]))


def random_ensemble(rng, count, max_dim=5):
    """Well-conditioned random (A, B, alpha) triples."""
    for _ in range(count):
        s = int(rng.integers(1, max_dim + 1))
        r = int(rng.integers(1, max_dim + 1))
        while True:
            a = rng.uniform(-2.0, 2.0, size=(s, s))
            if abs(np.linalg.det(a)) > 1e-2 and np.linalg.cond(a) < 100.0:
                break
        b = rng.uniform(-2.0, 2.0, size=(s, r))
        alpha = rng.integers(-10, 11, size=s)
        yield FrequencyData(a, b), alpha


class TestComputeQ:
    def test_scalar_case(self):
        fd = FrequencyData(np.array([[2.0]]), np.array([[3.0]]))
        assert compute_Q(fd, [1]) == pytest.approx([1.5], abs=1e-14)

    def test_identity_tangential(self, rng):
        b = rng.normal(size=(3, 2))
        fd = FrequencyData(np.eye(3), b)
        alpha = np.array([1.0, -2.0, 3.0])
        assert np.allclose(compute_Q(fd, alpha), b.T @ alpha, atol=1e-12)

    def test_momentum_model_value(self):
        q = compute_Q(system_c_data(), [1, 0])
        assert q == pytest.approx([SQRT2 / 2.0], abs=1e-14)

    def test_singular_raises(self):
        fd = FrequencyData(np.array([[1.0, 1.0], [1.0, 1.0]]), np.zeros((2, 1)))
        with pytest.raises(SingularFrequencyMatrixError):
            compute_Q(fd, [1, 0])

    def test_linearity(self, rng):
        for fd, _ in random_ensemble(rng, 20):
            a1 = rng.integers(-5, 6, size=fd.s)
            a2 = rng.integers(-5, 6, size=fd.s)
            lhs = compute_Q(fd, a1 + a2)
            rhs = compute_Q(fd, a1) + compute_Q(fd, a2)
            assert np.max(np.abs(lhs - rhs)) < 1e-10


class TestDeterminantCriterion:
    def test_momentum_model_cofactors(self):
        res = determinant_criterion(system_c_data(), [1, 0])
        assert res.detA == pytest.approx(2.0, abs=1e-14)
        # both column substitutions give |Omega| = nu
        assert np.allclose(res.omega_dets, [[SQRT2, SQRT2]], atol=1e-12)
        assert res.nondegenerate
        assert res.margin == pytest.approx(1.0 - SQRT2 / 2.0, abs=1e-12)

    def test_identity_tangential_sums(self):
        b = np.array([[0.3], [1.7]])
        fd = FrequencyData(np.eye(2), b)
        res = determinant_criterion(fd, [2, -1])
        s_val = 2 * 0.3 - 1.7
        assert res.Q[0] == pytest.approx(s_val, abs=1e-12)
        assert np.allclose(res.omega_dets, [[0.3, 1.7]], atol=1e-14)

    def test_zero_class_degenerate(self, rng):
        for fd, _ in random_ensemble(rng, 5):
            res = determinant_criterion(fd, np.zeros(fd.s, dtype=int))
            assert not res.nondegenerate
            assert res.margin == 0.0

    def test_cofactor_identity_ensemble(self, rng):
        for fd, alpha in random_ensemble(rng, 100):
            res = determinant_criterion(fd, alpha)
            s_vals = res.omega_dets @ alpha
            gap = np.abs(res.Q * res.detA - s_vals)
            assert np.all(gap <= 1e-8 * (1.0 + np.abs(res.Q) * abs(res.detA)))

    def test_equivalence_of_routes(self, rng):
        for fd, alpha in random_ensemble(rng, 100):
            res = determinant_criterion(fd, alpha, tol_int=1e-8)
            q = compute_Q(fd, alpha)
            q_verdict = bool(np.all(np.abs(q - np.round(q)) > 1e-8))
            assert res.nondegenerate == q_verdict


class TestLyapunovSpecialization:
    def test_irrational_ratio(self):
        assert lyapunov_specialization(1.0, [SQRT2]) is True

    def test_integer_ratio(self):
        assert lyapunov_specialization(1.0, [3.0]) is False

    def test_non_integer_rational(self):
        assert lyapunov_specialization(2.0, [3.0]) is True

    def test_zero_omega_raises(self):
        with pytest.raises(ValueError):
            lyapunov_specialization(0.0, [1.0])

    def test_matches_determinant_route_on_grid(self):
        omegas = np.linspace(0.5, 3.0, 10)
        ratios = np.arange(-4, 6) / 2.0  # includes exact integers
        for w in omegas:
            for rat in ratios:
                nu = rat * w
                fd = FrequencyData(np.array([[w]]), np.array([[nu]]))
                det_verdict = determinant_criterion(fd, [1]).nondegenerate
                assert det_verdict == lyapunov_specialization(w, [nu])


class TestSearchAlpha:
    def test_scalar_irrational(self):
        fd = FrequencyData(np.array([[1.0]]), np.array([[SQRT2]]))
        assert np.array_equal(search_alpha(fd, 3), [1])

    def test_scalar_integer_ratio_none(self):
        fd = FrequencyData(np.array([[1.0]]), np.array([[2.0]]))
        assert search_alpha(fd, 6) is None

    def test_momentum_model_first_hit(self):
        # the (1, -1) family has Q = 0 and is skipped; (1, 0) wins
        alpha = search_alpha(system_c_data(), 2)
        assert np.array_equal(alpha, [1, 0])
        res = determinant_criterion(system_c_data(), alpha)
        assert res.margin == pytest.approx(1.0 - SQRT2 / 2.0, abs=1e-12)

    def test_all_degenerate_none(self):
        # integer B over identity A: every class hits an integer
        fd = FrequencyData(np.eye(2), np.array([[1.0], [2.0]]))
        assert search_alpha(fd, 3) is None
