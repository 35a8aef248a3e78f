"""Small dense linear-algebra and root-finding kernel.

Everything here works on matrices of size at most ~20x20 (2n with
n <= 10), so clarity wins over asymptotic speed.  All functions are
pure; values can be shared freely across threads.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .errors import (
    DegenerateFrameError,
    DimensionError,
    NondegeneracyFailure,
    NoConvergenceError,
    NumericFailure,
)

__all__ = [
    "det",
    "eigenvalues",
    "orthonormal_complement",
    "newton_solve",
    "NewtonResult",
    "match_spectra",
    "spectral_distance",
]


def det(m) -> float:
    """Determinant of a square matrix.

    Exact for 1x1 and 2x2 input; LU factorization with partial pivoting
    otherwise.  Raises DimensionError on non-square input.
    """
    a = np.asarray(m, dtype=float)
    if a.ndim != 2 or a.shape[0] != a.shape[1]:
        raise DimensionError(f"det expects a square matrix, got shape {a.shape}")
    if not np.all(np.isfinite(a)):
        raise DimensionError("det expects finite entries")
    k = a.shape[0]
    if k == 0:
        return 1.0
    if k == 1:
        return float(a[0, 0])
    if k == 2:
        return float(a[0, 0] * a[1, 1] - a[0, 1] * a[1, 0])
    a = a.copy()
    sign = 1.0
    for col in range(k - 1):
        piv = col + int(np.argmax(np.abs(a[col:, col])))
        if a[piv, col] == 0.0:
            return 0.0
        if piv != col:
            a[[col, piv]] = a[[piv, col]]
            sign = -sign
        mult = a[col + 1 :, col] / a[col, col]
        a[col + 1 :, col:] -= np.outer(mult, a[col, col:])
    return float(sign * np.prod(np.diag(a)))


def eigenvalues(m) -> np.ndarray:
    """All eigenvalues of a real square matrix, with multiplicity.

    Returns a complex array sorted by (real, imag) for determinism.  The
    eigenvalue sum is checked against the trace to 1e-9*(1+|trace|); a
    violation (or LAPACK non-convergence) raises NumericFailure.
    """
    a = np.asarray(m, dtype=float)
    if a.ndim != 2 or a.shape[0] != a.shape[1]:
        raise DimensionError(f"eigenvalues expects a square matrix, got shape {a.shape}")
    if a.shape[0] == 0:
        return np.zeros(0, dtype=complex)
    try:
        vals = np.linalg.eigvals(a)
    except np.linalg.LinAlgError as exc:
        raise NumericFailure(f"eigenvalue iteration did not converge: {exc}") from exc
    tr = float(np.trace(a))
    if abs(vals.sum() - tr) > 1e-9 * (1.0 + abs(tr)):
        raise NumericFailure(
            f"eigenvalue sum {vals.sum()} inconsistent with trace {tr}"
        )
    order = np.lexsort((vals.imag, vals.real))
    return vals[order]


def orthonormal_complement(columns) -> np.ndarray:
    """Orthonormal basis of the orthogonal complement of span(columns).

    columns is (d, k) with full column rank k (smallest singular value
    above 1e-10 times the largest); the result is (d, d-k) with mutually
    orthonormal columns orthogonal to every input column.
    """
    c = np.asarray(columns, dtype=float)
    if c.ndim != 2:
        raise DimensionError(f"expected a 2-d column matrix, got shape {c.shape}")
    d, k = c.shape
    if k == 0:
        return np.eye(d)
    if k > d:
        raise DimensionError(f"more columns ({k}) than dimensions ({d})")
    u, sv, _ = np.linalg.svd(c, full_matrices=True)
    if sv[-1] <= 1e-10 * sv[0]:
        raise DegenerateFrameError(
            f"columns are rank deficient: singular values {sv}"
        )
    return u[:, k:]


@dataclass
class NewtonResult:
    """Solution of a Newton solve plus conditioning diagnostics."""

    y: np.ndarray
    jacobian: np.ndarray
    iterations: int
    residual_norm: float


def newton_solve(residual, guess, tol: float = 1e-12, max_iter: int = 25) -> NewtonResult:
    """Newton's method with forward finite-difference Jacobians.

    The Jacobian column step is h_j = 1e-6*(1+|y_j|).  Raises
    NondegeneracyFailure when the Jacobian condition estimate exceeds
    1e12 and NoConvergenceError when max_iter is exhausted.  The Jacobian
    of the final iterate is returned for conditioning diagnostics.
    """
    y = np.atleast_1d(np.asarray(guess, dtype=float)).copy()
    d = y.size
    r = np.atleast_1d(np.asarray(residual(y), dtype=float))
    if r.size != d:
        raise DimensionError(f"residual dimension {r.size} != unknown dimension {d}")
    jac = np.empty((d, d))
    for it in range(1, max_iter + 1):
        for j in range(d):
            h = 1e-6 * (1.0 + abs(y[j]))
            yp = y.copy()
            yp[j] += h
            jac[:, j] = (np.atleast_1d(residual(yp)) - r) / h
        if not np.all(np.isfinite(jac)):
            raise NumericFailure("non-finite Jacobian in newton_solve")
        if np.linalg.cond(jac) > 1e12:
            raise NondegeneracyFailure(
                f"Jacobian numerically singular (cond > 1e12) at iterate {it - 1}"
            )
        rnorm = float(np.max(np.abs(r)))
        if rnorm < tol:
            return NewtonResult(y, jac.copy(), it - 1, rnorm)
        y = y - np.linalg.solve(jac, r)
        r = np.atleast_1d(np.asarray(residual(y), dtype=float))
    rnorm = float(np.max(np.abs(r)))
    if rnorm < tol:
        return NewtonResult(y, jac.copy(), max_iter, rnorm)
    raise NoConvergenceError(
        f"newton_solve: no convergence after {max_iter} iterations "
        f"(residual {rnorm:.3e}, tol {tol:.3e})"
    )


def match_spectra(first, second):
    """Greedy minimal-distance pairing of two equal-size complex multisets.

    Returns (pairs, max_distance) where pairs is a list of index tuples
    (i, j) into the inputs, chosen by repeatedly taking the globally
    closest unmatched pair.
    """
    a = np.asarray(first, dtype=complex).ravel()
    b = np.asarray(second, dtype=complex).ravel()
    if a.size != b.size:
        raise DimensionError(f"multiset sizes differ: {a.size} vs {b.size}")
    if a.size == 0:
        return [], 0.0
    dist = np.abs(a[:, None] - b[None, :])
    free_a = set(range(a.size))
    free_b = set(range(b.size))
    pairs = []
    worst = 0.0
    while free_a:
        best = None
        for i in free_a:
            for j in free_b:
                if best is None or dist[i, j] < dist[best]:
                    best = (i, j)
        pairs.append(best)
        worst = max(worst, float(dist[best]))
        free_a.discard(best[0])
        free_b.discard(best[1])
    return pairs, worst


def spectral_distance(first, second) -> float:
    """Hausdorff-type multiset distance between two spectra."""
    _, worst = match_spectra(first, second)
    return worst
