import numpy as np
import pytest

from toruskit.hamiltonian import HamiltonianSystem


def harmonic_oscillator(omega=1.0):
    """n=1 oscillator F = omega*(q^2+p^2)/2 with analytic derivatives."""

    def eval_F(i, x, eps):
        return 0.5 * omega * (x[..., 0] ** 2 + x[..., 1] ** 2)

    def grad_F(i, x, eps):
        return omega * np.stack((x[..., 0], x[..., 1]), axis=-1)

    def hess_F(i, x, eps):
        return omega * np.eye(2)

    return HamiltonianSystem(1, 1, eval_F, grad_F, hess_F, vectorized=True,
                             name=f"oscillator(omega={omega})")


def momentum_translation():
    """n=1 system F = p (free translation)."""

    def eval_F(i, x, eps):
        return x[..., 1]

    return HamiltonianSystem(1, 1, eval_F, name="translation")


def angular_momentum_system():
    """n=2 system F = q1 p2 - q2 p1."""

    def eval_F(i, x, eps):
        return x[..., 0] * x[..., 3] - x[..., 1] * x[..., 2]

    def grad_F(i, x, eps):
        return np.stack((x[..., 3], -x[..., 2], -x[..., 1], x[..., 0]), axis=-1)

    return HamiltonianSystem(2, 1, eval_F, grad_F, name="angular momentum")


def canonical_pair_system():
    """n=2, s=2 with F1 = q1, F2 = p1 (not in involution)."""

    def eval_F(i, x, eps):
        return x[..., 0] if i == 1 else x[..., 2]

    def grad_F(i, x, eps):
        g = np.zeros_like(x)
        g[..., 0 if i == 1 else 2] = 1.0
        return g

    return HamiltonianSystem(2, 2, eval_F, grad_F, name="canonical pair")


@pytest.fixture(scope="session")
def rng():
    return np.random.default_rng(20240817)
