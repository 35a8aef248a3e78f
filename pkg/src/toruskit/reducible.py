"""Algebraic nondegeneracy criteria for reducible invariant tori.

A reducible torus carries tangential frequencies A (s x s, A_ij = the
rate of torus angle j under the flow of integral i) and transversal
frequencies B (s x r, r = n - s).  The multiplicity of the Floquet
multiplier 1 of the class-alpha orbits stays at 2s exactly when the
transverse winding numbers

    Q_j(alpha) = (B^T (A^T)^{-1} alpha)_j

avoid the integers; equivalently, with Omega(k;j) denoting A with its
k-th column replaced by the j-th column of B,

    sum_k alpha_k |Omega(k;j)| != m |A|   for all integers m and all j.

Row convention matters: A rows are indexed by the integral, columns by
the torus angle, and P = (A^T)^{-1}.  Transposing A is the classic bug.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .errors import NumericFailure, SingularFrequencyMatrixError
from .numerics import det

__all__ = [
    "FrequencyData",
    "CriterionResult",
    "compute_Q",
    "determinant_criterion",
    "search_alpha",
    "lyapunov_specialization",
]


@dataclass
class FrequencyData:
    """Tangential (A, s x s) and transversal (B, s x r) frequency matrices."""

    A: np.ndarray
    B: np.ndarray

    def __post_init__(self):
        self.A = np.asarray(self.A, dtype=float)
        self.B = np.asarray(self.B, dtype=float)
        if self.A.ndim != 2 or self.A.shape[0] != self.A.shape[1]:
            raise ValueError(f"A must be square, got {self.A.shape}")
        if self.B.ndim != 2 or self.B.shape[0] != self.A.shape[0]:
            raise ValueError(
                f"B must have s={self.A.shape[0]} rows, got {self.B.shape}"
            )

    @property
    def s(self) -> int:
        return self.A.shape[0]

    @property
    def r(self) -> int:
        return self.B.shape[1]


def _require_invertible(fd: FrequencyData) -> float:
    d = det(fd.A)
    if abs(d) <= 1e-12 * max(float(np.linalg.norm(fd.A)), 1e-300):
        raise SingularFrequencyMatrixError(
            f"tangential frequency matrix is singular (|A| = {d:.3e})"
        )
    return d


def compute_Q(fd: FrequencyData, alpha) -> np.ndarray:
    """Transverse winding numbers Q(alpha) = B^T (A^T)^{-1} alpha."""
    _require_invertible(fd)
    alpha = np.asarray(alpha, dtype=float)
    return fd.B.T @ np.linalg.solve(fd.A.T, alpha)


def _int_distance(x: np.ndarray) -> np.ndarray:
    return np.abs(x - np.round(x))


@dataclass
class CriterionResult:
    """Outcome of the determinant nondegeneracy criterion for one class.

    omega_dets[j, k] is |Omega(k;j)| (0-indexed).  margin is the minimum
    over j of the distance of Q_j to its nearest integer; the class is
    nondegenerate when margin > tol_int.
    """

    Q: np.ndarray
    omega_dets: np.ndarray
    detA: float
    nondegenerate: bool
    margin: float
    alpha: np.ndarray
    tol_int: float


def determinant_criterion(fd: FrequencyData, alpha, tol_int: float = 1e-8) -> CriterionResult:
    """Inversion-free form of the multiplier-multiplicity condition.

    Builds each Omega(k;j), forms S_j = sum_k alpha_k |Omega(k;j)| and
    tests S_j/|A| against the integers.  The cofactor identity
    S_j = Q_j |A| is asserted against compute_Q to 1e-9 relative as an
    internal cross-check of the two routes.
    """
    d = _require_invertible(fd)
    alpha = np.asarray(alpha, dtype=float)
    s, r = fd.s, fd.r
    omega_dets = np.empty((r, s))
    for j in range(r):
        for k in range(s):
            omega = fd.A.copy()
            omega[:, k] = fd.B[:, j]
            omega_dets[j, k] = det(omega)
    S = omega_dets @ alpha
    q = compute_Q(fd, alpha)
    mismatch = np.abs(q * d - S)
    bound = 1e-9 * (1.0 + np.abs(q) * abs(d))
    if np.any(mismatch > bound):
        raise NumericFailure(
            f"cofactor identity violated: |Q|A| - S| = {mismatch.max():.3e}"
        )
    ratios = S / d
    margins = _int_distance(ratios)
    margin = float(margins.min()) if margins.size else np.inf
    return CriterionResult(
        Q=q,
        omega_dets=omega_dets,
        detA=d,
        nondegenerate=bool(margin > tol_int),
        margin=margin,
        alpha=np.asarray(alpha, dtype=int)
        if np.allclose(alpha, np.round(alpha))
        else alpha,
        tol_int=tol_int,
    )


def _orientation_representatives(s: int, max_norm: int):
    """Homotopy classes up to orientation, in the documented search order.

    The criterion is sign-symmetric (Q(-alpha) = -Q(alpha)), so classes
    are enumerated with their first nonzero component positive, in shells
    of increasing sup-norm; within a shell components vary fastest in the
    first coordinate (ascending lexicographic read from the last).
    """
    for shell in range(1, max_norm + 1):
        values = list(range(-shell, shell + 1))
        # Odometer with the last component most significant.
        def rec(prefix):
            if len(prefix) == s:
                alpha = tuple(reversed(prefix))
                if max(abs(a) for a in alpha) != shell:
                    return
                for a in alpha:
                    if a != 0:
                        if a > 0:
                            yield np.array(alpha, dtype=int)
                        return
                return
            for v in values:
                yield from rec(prefix + [v])

        yield from rec([])


def search_alpha(fd: FrequencyData, max_norm: int, tol_int: float = 1e-8):
    """First nondegenerate class with sup-norm <= max_norm, or None.

    The enumeration order (see _orientation_representatives) is part of
    the contract; results are reproducible.
    """
    _require_invertible(fd)
    for alpha in _orientation_representatives(fd.s, max_norm):
        if determinant_criterion(fd, alpha, tol_int).nondegenerate:
            return alpha
    return None


def lyapunov_specialization(omega1: float, nus, tol_int: float = 1e-8) -> bool:
    """s = 1 specialization: some integer class works iff no nu_k/omega_1
    is an integer (within tol_int)."""
    if omega1 == 0.0:
        raise ValueError("omega1 must be nonzero")
    nus = np.atleast_1d(np.asarray(nus, dtype=float))
    return bool(np.all(_int_distance(nus / omega1) > tol_int))
