"""System interface: integrals, gradients, Hessians, symplectic structure.

Coordinate convention, fixed globally: x = (q_1..q_n, p_1..p_n) and

    J = [[0, I], [-I, 0]],

so Hamiltonian vector fields read qdot_j = dF/dp_j, pdot_j = -dF/dq_j.
Integral indices i are 1-based (F_1 .. F_s) throughout the public API.
"""

from __future__ import annotations

import numpy as np

from dataclasses import dataclass, field

__all__ = [
    "HamiltonianSystem",
    "symplectic_matrix",
    "apply_J",
    "vector_field",
    "poisson_bracket",
    "check_hypotheses",
    "HypothesisReport",
    "sample_neighborhood",
]


def symplectic_matrix(n: int) -> np.ndarray:
    """The standard symplectic matrix [[0, I], [-I, 0]] of size 2n."""
    j = np.zeros((2 * n, 2 * n))
    j[:n, n:] = np.eye(n)
    j[n:, :n] = -np.eye(n)
    return j


def apply_J(v: np.ndarray) -> np.ndarray:
    """J @ v without forming J; v may be batched with shape (..., 2n)."""
    n = v.shape[-1] // 2
    return np.concatenate((v[..., n:], -v[..., :n]), axis=-1)


class HamiltonianSystem:
    """Bundle of s integrals of motion on R^{2n} with their derivatives.

    Parameters
    ----------
    n, s : int
        Degrees of freedom and number of integrals, 1 <= s <= n.
    eval_F : callable(i, x, eps) -> float
        Value of the i-th integral (i is 1-based).  When ``vectorized``
        is set it must also accept x of shape (m, 2n) and return (m,).
    grad_F : callable(i, x, eps) -> array, optional
        Gradient; defaults to central finite differences of eval_F.
    hess_F : callable(i, x, eps) -> (2n, 2n) array, optional
        Hessian; defaults to central finite differences of grad_F.
    vectorized : bool
        Whether eval_F/grad_F broadcast over a leading batch axis.
    selftest_points : array (m, 2n), optional
        If given, gradients are checked against finite differences of
        eval_F (relative 1e-6) and Hessian symmetry is checked (1e-8)
        once, at construction.

    The object is immutable after construction and safe for concurrent
    use; all evaluations are pure.
    """

    def __init__(self, n, s, eval_F, grad_F=None, hess_F=None, *, vectorized=False,
                 name="", selftest_points=None, selftest_eps=0.0):
        if not 1 <= s <= n:
            raise ValueError(f"require 1 <= s <= n, got s={s}, n={n}")
        self.n = int(n)
        self.s = int(s)
        self.dim = 2 * self.n
        self.name = name
        self.vectorized = bool(vectorized)
        self._eval = eval_F
        self._grad = grad_F
        self._hess = hess_F
        if selftest_points is not None:
            self._selftest(np.atleast_2d(np.asarray(selftest_points, dtype=float)),
                           selftest_eps)

    def _check_index(self, i):
        if not 1 <= i <= self.s:
            raise IndexError(f"integral index {i} out of range 1..{self.s}")

    def F(self, i: int, x, eps: float):
        """Value of F_i at x (batched when the system is vectorized)."""
        self._check_index(i)
        return self._eval(i, np.asarray(x, dtype=float), eps)

    def grad(self, i: int, x, eps: float) -> np.ndarray:
        """Gradient of F_i at x; finite differences when not supplied."""
        self._check_index(i)
        x = np.asarray(x, dtype=float)
        if self._grad is not None:
            return self._grad(i, x, eps)
        return self._fd_grad(i, x, eps)

    def hess(self, i: int, x, eps: float) -> np.ndarray:
        """Hessian of F_i at x; finite differences of grad when not supplied."""
        self._check_index(i)
        x = np.asarray(x, dtype=float)
        if self._hess is not None:
            return self._hess(i, x, eps)
        d = x.size
        h = np.empty((d, d))
        for j in range(d):
            step = 1e-6 * (1.0 + abs(x[j]))
            xp = x.copy()
            xm = x.copy()
            xp[j] += step
            xm[j] -= step
            h[:, j] = (self.grad(i, xp, eps) - self.grad(i, xm, eps)) / (2 * step)
        return 0.5 * (h + h.T)

    def _fd_grad(self, i, x, eps):
        single = x.ndim == 1
        pts = np.atleast_2d(x)
        g = np.empty_like(pts)
        for j in range(pts.shape[1]):
            step = 1e-6 * (1.0 + np.abs(pts[:, j]))
            xp = pts.copy()
            xm = pts.copy()
            xp[:, j] += step
            xm[:, j] -= step
            if self.vectorized:
                g[:, j] = (self._eval(i, xp, eps) - self._eval(i, xm, eps)) / (2 * step)
            else:
                for r in range(pts.shape[0]):
                    g[r, j] = (self._eval(i, xp[r], eps) - self._eval(i, xm[r], eps)) / (2 * step[r])
        return g[0] if single else g

    def grad_matrix(self, x, eps: float) -> np.ndarray:
        """(2n, s) matrix whose columns are grad F_1 .. grad F_s at x."""
        return np.column_stack([self.grad(i, x, eps) for i in range(1, self.s + 1)])

    def _selftest(self, pts, eps):
        for i in range(1, self.s + 1):
            for x in pts:
                g = self.grad(i, x, eps)
                fd = self._fd_grad(i, x, eps)
                scale = 1.0 + np.max(np.abs(fd))
                if np.max(np.abs(g - fd)) > 1e-6 * scale:
                    raise ValueError(
                        f"gradient of F_{i} disagrees with finite differences "
                        f"of eval_F (max err {np.max(np.abs(g - fd)):.3e})"
                    )
                h = self.hess(i, x, eps)
                if np.max(np.abs(h - h.T)) > 1e-8 * (1.0 + np.max(np.abs(h))):
                    raise ValueError(f"Hessian of F_{i} is not symmetric")


def vector_field(sys: HamiltonianSystem, i: int, x, eps: float) -> np.ndarray:
    """Hamiltonian vector field X_i = J grad F_i at x (batch-capable)."""
    return apply_J(sys.grad(i, np.asarray(x, dtype=float), eps))


def poisson_bracket(sys: HamiltonianSystem, i: int, j: int, x, eps: float) -> float:
    """{F_i, F_j}(x) = grad F_i . J grad F_j.

    Computed as dot(gi_q, gj_p) - dot(gi_p, gj_q) so that the i == j case
    is exactly zero and swapping (i, j) flips the sign exactly.
    """
    x = np.asarray(x, dtype=float)
    gi = sys.grad(i, x, eps)
    gj = sys.grad(j, x, eps)
    n = sys.n
    return float(np.dot(gi[:n], gj[n:]) - np.dot(gi[n:], gj[:n]))


@dataclass
class HypothesisReport:
    """Sampled verification of involution and independence of the integrals."""

    max_bracket: float
    min_singular_value: float
    tol: float
    involution_ok: bool
    independence_ok: bool
    passed: bool
    n_samples: int
    eps: float
    worst_pair: tuple = field(default=(0, 0))


def check_hypotheses(sys: HamiltonianSystem, samples, eps: float, tol: float) -> HypothesisReport:
    """Check involution and independence of F_1..F_s on sample points.

    Reports max |{F_i, F_j}| over all pairs and samples, and the minimum
    over samples of the smallest singular value of the (2n, s) gradient
    matrix.  Failures are reported, never raised.
    """
    pts = np.atleast_2d(np.asarray(samples, dtype=float))
    max_bracket = 0.0
    worst_pair = (0, 0)
    min_sv = np.inf
    for x in pts:
        gm = sys.grad_matrix(x, eps)
        sv = np.linalg.svd(gm, compute_uv=False)
        min_sv = min(min_sv, float(sv[-1]) if sv.size else 0.0)
        for i in range(1, sys.s + 1):
            for j in range(i + 1, sys.s + 1):
                b = abs(poisson_bracket(sys, i, j, x, eps))
                if b > max_bracket:
                    max_bracket = b
                    worst_pair = (i, j)
    involution_ok = bool(max_bracket < tol)
    independence_ok = bool(min_sv > tol)
    return HypothesisReport(
        max_bracket=max_bracket,
        min_singular_value=float(min_sv),
        tol=tol,
        involution_ok=involution_ok,
        independence_ok=independence_ok,
        passed=involution_ok and independence_ok,
        n_samples=pts.shape[0],
        eps=eps,
        worst_pair=worst_pair,
    )


def sample_neighborhood(center, radius: float = 0.1, count: int = 100, seed: int = 7) -> np.ndarray:
    """Uniform samples in a sup-norm ball around center (deterministic)."""
    c = np.asarray(center, dtype=float)
    rng = np.random.default_rng(seed)
    return c + radius * rng.uniform(-1.0, 1.0, size=(count, c.size))
