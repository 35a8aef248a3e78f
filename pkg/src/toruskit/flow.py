"""Flows of the commuting Hamiltonian fields and the period-vector solver.

Individual flows g_i^t, the composed flow

    g^tau = g_1^{tau_1} o g_2^{tau_2} o ... o g_s^{tau_s}

(rightmost factor applied first), the variational flow producing the
Jacobian dg^tau, and a Gauss-Newton solver for the time vector c making
g^c close up an orbit in a prescribed homotopy class.

Integration is a Dormand-Prince 5(4) embedded pair with adaptive step
control; the runs here are short period maps, so a non-symplectic method
with tight tolerances is the right trade and energy drift is monitored
instead of enforced.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .errors import (
    BlowUpError,
    DegenerateTorusError,
    NoConvergenceError,
    StiffnessError,
)
from .hamiltonian import HamiltonianSystem, apply_J

__all__ = [
    "FlowResult",
    "PeriodVector",
    "evolve",
    "evolve_states",
    "composed_flow",
    "composed_flow_states",
    "find_period_vector",
]

# Dormand-Prince 5(4) tableau (FSAL), packed as stage-combination rows.
_A = np.zeros((7, 7))
_A[1, 0] = 1 / 5
_A[2, :2] = (3 / 40, 9 / 40)
_A[3, :3] = (44 / 45, -56 / 15, 32 / 9)
_A[4, :4] = (19372 / 6561, -25360 / 2187, 64448 / 6561, -212 / 729)
_A[5, :5] = (9017 / 3168, -355 / 33, 46732 / 5247, 49 / 176, -5103 / 18656)
_A[6, :6] = (35 / 384, 0.0, 500 / 1113, 125 / 192, -2187 / 6784, 11 / 84)
_B = _A[6, :6].copy()
# y5 - y4 error weights against k1..k7.
_E = np.array([71 / 57600, 0.0, -71 / 16695, 71 / 1920, -17253 / 339200, 22 / 525, -1 / 40])

_MAX_STEPS = 1_000_000


def _dp45(f, y0, t, rtol, atol):
    """Integrate y' = f(y) from 0 to t; returns (y, accepted_steps)."""
    y = np.asarray(y0, dtype=float).copy()
    if t == 0.0:
        return y, 0
    direction = 1.0 if t > 0 else -1.0
    k = np.empty((7, y.size))
    k[0] = f(y)
    # Starting step from the scale of the initial derivative.
    scale = atol + rtol * np.abs(y)
    d0 = np.sqrt(np.mean((y / scale) ** 2))
    d1 = np.sqrt(np.mean((k[0] / scale) ** 2))
    h = 0.01 * d0 / d1 if d0 > 1e-5 and d1 > 1e-5 else 1e-6
    h = direction * min(h, abs(t))
    time = 0.0
    steps = 0
    for _ in range(_MAX_STEPS):
        if abs(h) < 1e-14 * abs(t):
            raise StiffnessError(
                f"step size underflow at time {time} of {t} (h={h:.3e})"
            )
        if direction * (time + h) > direction * t:
            h = t - time
        for stage in range(1, 6):
            k[stage] = f(y + h * (_A[stage, :stage] @ k[:stage]))
        y_new = y + h * (_B @ k[:6])
        k[6] = f(y_new)
        if not np.all(np.isfinite(y_new)):
            raise BlowUpError(f"non-finite state at time {time + h}")
        err = h * (_E @ k)
        scale = atol + rtol * np.maximum(np.abs(y), np.abs(y_new))
        err_norm = np.sqrt(np.mean((err / scale) ** 2))
        if err_norm <= 1.0:
            time += h
            y = y_new
            k[0] = k[6]
            steps += 1
            if time == t or abs(t - time) < 1e-15 * abs(t):
                return y, steps
            factor = 10.0 if err_norm == 0.0 else min(10.0, 0.9 * err_norm ** -0.2)
        else:
            factor = max(0.2, 0.9 * err_norm ** -0.2)
        h *= max(0.2, min(10.0, factor))
    raise StiffnessError(f"step budget exhausted integrating to t={t}")


@dataclass
class FlowResult:
    """Endpoint of a flow, with optional tangent-flow Jacobian.

    max_energy_drift is max_i |F_i(endpoint) - F_i(start)|: a monitor,
    not a constraint, since the integrator is not symplectic.
    """

    endpoint: np.ndarray
    jacobian: np.ndarray | None
    steps: int
    max_energy_drift: float


def _drift(sys, x0, x1, eps):
    return max(
        abs(float(sys.F(i, x1, eps)) - float(sys.F(i, x0, eps)))
        for i in range(1, sys.s + 1)
    )


def evolve(sys: HamiltonianSystem, i: int, x0, t: float, eps: float,
           variational: bool = False, rtol: float = 1e-10, atol: float = 1e-12) -> FlowResult:
    """Flow of the single field X_i for time t from x0.

    With ``variational`` the tangent matrix V solving V' = (J HessF_i) V,
    V(0) = I is co-integrated and returned as ``jacobian``.
    """
    x0 = np.asarray(x0, dtype=float)
    d = sys.dim
    if x0.shape != (d,):
        raise ValueError(f"state shape {x0.shape} != ({d},)")
    if t == 0.0:
        return FlowResult(x0.copy(), np.eye(d) if variational else None, 0, 0.0)

    if variational:
        n = sys.n

        def rhs(z):
            x = z[:d]
            v = z[d:].reshape(d, d)
            dx = apply_J(sys.grad(i, x, eps))
            h = sys.hess(i, x, eps)
            jh = np.concatenate((h[n:, :], -h[:n, :]), axis=0)  # J @ Hess
            dv = jh @ v
            return np.concatenate((dx, dv.ravel()))

        z0 = np.concatenate((x0, np.eye(d).ravel()))
        z, steps = _dp45(rhs, z0, t, rtol, atol)
        end = z[:d]
        jac = z[d:].reshape(d, d)
    else:
        def rhs(x):
            return apply_J(sys.grad(i, x, eps))

        end, steps = _dp45(rhs, x0, t, rtol, atol)
        jac = None
    return FlowResult(end, jac, steps, _drift(sys, x0, end, eps))


def evolve_states(sys: HamiltonianSystem, i: int, states, t: float, eps: float,
                  rtol: float = 1e-10, atol: float = 1e-12) -> np.ndarray:
    """Flow of X_i applied to a whole batch of states (m, 2n) at once.

    One stacked integration; error control is over the full batch.
    """
    pts = np.atleast_2d(np.asarray(states, dtype=float))
    m, d = pts.shape
    if t == 0.0:
        return pts.copy()

    if sys.vectorized:
        def rhs(z):
            return apply_J(sys.grad(i, z.reshape(m, d), eps)).ravel()
    else:
        def rhs(z):
            x = z.reshape(m, d)
            g = np.vstack([sys.grad(i, row, eps) for row in x])
            return apply_J(g).ravel()

    z, _ = _dp45(rhs, pts.ravel(), t, rtol, atol)
    return z.reshape(m, d)


def composed_flow(sys: HamiltonianSystem, x0, tau, eps: float,
                  variational: bool = False, rtol: float = 1e-10, atol: float = 1e-12) -> FlowResult:
    """g^tau = g_1^{tau_1} o ... o g_s^{tau_s}, rightmost factor first.

    The fields commute, so the order affects only roundoff; it is fixed
    for determinism.  Jacobians are chain-multiplied when variational.
    """
    tau = np.asarray(tau, dtype=float)
    if tau.shape != (sys.s,):
        raise ValueError(f"tau shape {tau.shape} != ({sys.s},)")
    x0 = np.asarray(x0, dtype=float)
    x = x0.copy()
    jac = np.eye(sys.dim) if variational else None
    steps = 0
    for i in range(sys.s, 0, -1):
        res = evolve(sys, i, x, float(tau[i - 1]), eps,
                     variational=variational, rtol=rtol, atol=atol)
        x = res.endpoint
        steps += res.steps
        if variational:
            jac = res.jacobian @ jac
    return FlowResult(x, jac, steps, _drift(sys, x0, x, eps))


def composed_flow_states(sys: HamiltonianSystem, states, tau, eps: float,
                         rtol: float = 1e-10, atol: float = 1e-12) -> np.ndarray:
    """Batched composed flow (endpoints only)."""
    tau = np.asarray(tau, dtype=float)
    pts = np.atleast_2d(np.asarray(states, dtype=float))
    for i in range(sys.s, 0, -1):
        if tau[i - 1] != 0.0:
            pts = evolve_states(sys, i, pts, float(tau[i - 1]), eps, rtol=rtol, atol=atol)
    return pts


@dataclass
class PeriodVector:
    """Time vector c with g^c(m) = m, labelled by its homotopy class.

    The class alpha is inherited from the guess; the solver stays in
    its basin and never re-derives winding numbers.  c is stored as is;
    time is never rescaled to period one.
    """

    c: np.ndarray
    alpha: np.ndarray
    residual: float


def find_period_vector(sys: HamiltonianSystem, m, alpha, c_guess, eps: float,
                       tol: float = 1e-9, max_iter: int = 50,
                       rtol: float = 1e-10, atol: float = 1e-12) -> PeriodVector:
    """Gauss-Newton solve of g^c(m) = m for the s-component time vector c.

    The residual has 2n components and s unknowns; the Jacobian column i
    is the field X_i at the current endpoint (exact, by commutation).
    Damping halves the step while the residual norm would increase.
    """
    m = np.asarray(m, dtype=float)
    alpha = np.asarray(alpha, dtype=int)
    c = np.asarray(c_guess, dtype=float).copy()
    if c.shape != (sys.s,):
        raise ValueError(f"c_guess shape {c.shape} != ({sys.s},)")

    tangent = np.column_stack(
        [apply_J(sys.grad(i, m, eps)) for i in range(1, sys.s + 1)]
    )
    sv = np.linalg.svd(tangent, compute_uv=False)
    if sv[-1] <= 1e-10 * max(sv[0], 1e-300):
        raise DegenerateTorusError(
            f"flow directions rank deficient at base point (singular values {sv})"
        )

    def residual(cv):
        end = composed_flow_states(sys, m[None, :], cv, eps, rtol=rtol, atol=atol)[0]
        return end - m, end

    r, end = residual(c)
    rnorm = float(np.max(np.abs(r)))
    for _ in range(max_iter):
        if rnorm < tol:
            return PeriodVector(c, alpha, rnorm)
        jac = np.column_stack(
            [apply_J(sys.grad(i, end, eps)) for i in range(1, sys.s + 1)]
        )
        step, *_ = np.linalg.lstsq(jac, -r, rcond=None)
        lam = 1.0
        for _ in range(8):
            r_new, end_new = residual(c + lam * step)
            if np.max(np.abs(r_new)) < rnorm:
                break
            lam *= 0.5
        else:
            raise NoConvergenceError(
                f"period solve stalled at residual {rnorm:.3e} (tol {tol:.3e})"
            )
        c = c + lam * step
        r, end = r_new, end_new
        rnorm = float(np.max(np.abs(r)))
    if rnorm < tol:
        return PeriodVector(c, alpha, rnorm)
    raise NoConvergenceError(
        f"period solve: no convergence after {max_iter} iterations "
        f"(residual {rnorm:.3e})"
    )
