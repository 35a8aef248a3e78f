"""Built-in model systems with analytically known tori and multipliers.

All three models are written in the oscillator normal form with actions
I_j = (q_j^2 + p_j^2)/2 and serve as ground truth for the acceptance
suite:

* ``action_oscillators``: F_1 = sum_j omega_j I_j + eps*sum_j a_j I_j^2,
  F_i = I_i for 2 <= i <= s.  Every torus {I = const} is exactly
  invariant for every eps, so the transverse fixed point is identically
  zero and frequencies are omega_j + 2*eps*a_j*I_j in closed form.
* ``lyapunov``: n = 2, s = 1, F_1 = omega1*I_1 + nu*I_2 + eps*q_1^2*q_2.
  The coupling breaks integrability while keeping F_1 conserved.
* ``isotropic_momentum``: n = 3, s = 2,
  F_1 = omega*(I_1+I_2) + nu*I_3 + eps*(q_1^2+q_2^2)*q_3, F_2 = angular
  momentum L = q_1 p_2 - q_2 p_1.  The coupling is rotation invariant,
  so {F_1, F_2} = 0 for every eps.

For ``isotropic_momentum`` the torus angles are the two circular modes
of the (1,2)-oscillator pair, ordered (retrograde, prograde) so that the
tangential frequency matrix is A = [[omega, omega], [-1, 1]] and
L = I2 - I1 in those actions.  Base points sit at angles zero.
"""

from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np

from .errors import InvalidModelError, UnsupportedOracleError
from .hamiltonian import HamiltonianSystem
from .reducible import FrequencyData

__all__ = ["ModelSpec", "TorusSeed", "make_system", "oracle", "MODEL_NAMES"]

MODEL_NAMES = ("action_oscillators", "lyapunov", "isotropic_momentum")


@dataclass
class ModelSpec:
    """Name plus named real parameters of a built-in model."""

    name: str
    params: dict = field(default_factory=dict)
    n: int = 0
    s: int = 0

    def __post_init__(self):
        if self.name not in MODEL_NAMES:
            raise InvalidModelError(
                f"unknown model {self.name!r}; expected one of {MODEL_NAMES}"
            )
        if self.name == "lyapunov":
            self.n, self.s = 2, 1
        elif self.name == "isotropic_momentum":
            self.n, self.s = 3, 2


@dataclass
class TorusSeed:
    """Base point on a distinguished torus plus homotopy bookkeeping.

    lattice_c_guesses has the period-vector guess for basis class e_j in
    column j; alpha/c_guess single out the preferred class used for the
    return map.
    """

    base_point: np.ndarray
    beta0: np.ndarray
    alpha: np.ndarray
    c_guess: np.ndarray
    lattice_c_guesses: np.ndarray
    name: str = ""


def _finite(params, keys):
    for key in keys:
        val = np.asarray(params[key], dtype=float)
        if not np.all(np.isfinite(val)):
            raise InvalidModelError(f"parameter {key!r} must be finite")


def _make_action_oscillators(spec: ModelSpec):
    params = spec.params
    n, s = spec.n, spec.s
    if not 1 <= s <= n:
        raise InvalidModelError(f"need 1 <= s <= n, got s={s}, n={n}")
    if params.get("omega") is None:
        raise InvalidModelError("action_oscillators requires an omega list")
    omega = np.asarray(params["omega"], dtype=float)
    a = np.asarray(params.get("a", np.ones(n)), dtype=float)
    if omega.shape != (n,) or a.shape != (n,):
        raise InvalidModelError(
            f"omega and a must have length n={n}, got {omega.shape}, {a.shape}"
        )
    _finite({"omega": omega, "a": a}, ("omega", "a"))
    if omega[0] == 0.0:
        raise InvalidModelError("omega[0] must be nonzero")

    def eval_F(i, x, eps):
        q, p = x[..., :n], x[..., n:]
        act = 0.5 * (q * q + p * p)
        if i == 1:
            return act @ omega + eps * (act * act) @ a
        return act[..., i - 1]

    def grad_F(i, x, eps):
        q, p = x[..., :n], x[..., n:]
        if i == 1:
            act = 0.5 * (q * q + p * p)
            w = omega + 2.0 * eps * a * act
            return np.concatenate((w * q, w * p), axis=-1)
        g = np.zeros_like(x)
        g[..., i - 1] = q[..., i - 1]
        g[..., n + i - 1] = p[..., i - 1]
        return g

    def hess_F(i, x, eps):
        q, p = x[:n], x[n:]
        h = np.zeros((2 * n, 2 * n))
        if i == 1:
            act = 0.5 * (q * q + p * p)
            w = omega + 2.0 * eps * a * act
            np.fill_diagonal(h, np.concatenate((w, w)))
            for j in range(n):
                if a[j] == 0.0 or eps == 0.0:
                    continue
                v = np.zeros(2 * n)
                v[j] = q[j]
                v[n + j] = p[j]
                h += 2.0 * eps * a[j] * np.outer(v, v)
        else:
            h[i - 1, i - 1] = 1.0
            h[n + i - 1, n + i - 1] = 1.0
        return h

    base = np.zeros(2 * n)
    base[:s] = np.sqrt(2.0)  # I_j = 1 for j <= s, angles zero
    beta0 = np.empty(s)
    beta0[0] = omega[:s].sum()
    beta0[1:] = 1.0

    A = np.zeros((s, s))
    A[0, :] = omega[:s]
    for i in range(1, s):
        A[i, i] = 1.0
    B = np.zeros((s, n - s))
    B[0, :] = omega[s:]
    fd = FrequencyData(A, B)

    lattice = 2.0 * np.pi * np.linalg.inv(A.T)
    alpha = np.zeros(s, dtype=int)
    alpha[0] = 1
    seed = TorusSeed(base, beta0, alpha, lattice[:, 0].copy(), lattice, spec.name)

    sys = HamiltonianSystem(
        n, s, eval_F, grad_F, hess_F, vectorized=True, name=spec.name,
        selftest_points=base[None, :] + 0.05,
    )
    return sys, seed, fd


def _make_lyapunov(spec: ModelSpec):
    params = spec.params
    omega1 = float(params.get("omega1", 1.0))
    nu = float(params.get("nu", np.sqrt(2.0)))
    _finite({"omega1": omega1, "nu": nu}, ("omega1", "nu"))
    if omega1 == 0.0:
        raise InvalidModelError("omega1 must be nonzero")

    def eval_F(i, x, eps):
        q1, q2 = x[..., 0], x[..., 1]
        p1, p2 = x[..., 2], x[..., 3]
        return (0.5 * omega1 * (q1 * q1 + p1 * p1)
                + 0.5 * nu * (q2 * q2 + p2 * p2)
                + eps * q1 * q1 * q2)

    def grad_F(i, x, eps):
        q1, q2 = x[..., 0], x[..., 1]
        p1, p2 = x[..., 2], x[..., 3]
        return np.stack(
            (omega1 * q1 + 2.0 * eps * q1 * q2,
             nu * q2 + eps * q1 * q1,
             omega1 * p1,
             nu * p2),
            axis=-1,
        )

    def hess_F(i, x, eps):
        q1, q2 = x[0], x[1]
        return np.array(
            [
                [omega1 + 2.0 * eps * q2, 2.0 * eps * q1, 0.0, 0.0],
                [2.0 * eps * q1, nu, 0.0, 0.0],
                [0.0, 0.0, omega1, 0.0],
                [0.0, 0.0, 0.0, nu],
            ]
        )

    base = np.array([np.sqrt(2.0), 0.0, 0.0, 0.0])
    beta0 = np.array([omega1])
    fd = FrequencyData(np.array([[omega1]]), np.array([[nu]]))
    lattice = np.array([[2.0 * np.pi / omega1]])
    seed = TorusSeed(base, beta0, np.array([1]), lattice[:, 0].copy(), lattice, spec.name)
    sys = HamiltonianSystem(
        2, 1, eval_F, grad_F, hess_F, vectorized=True, name=spec.name,
        selftest_points=base[None, :] + 0.05,
    )
    return sys, seed, fd


def _make_isotropic_momentum(spec: ModelSpec):
    params = spec.params
    omega = float(params.get("omega", 1.0))
    nu = float(params.get("nu", np.sqrt(2.0)))
    act1 = float(params.get("a", 1.0))
    act2 = float(params.get("b", 0.5))
    _finite({"omega": omega, "nu": nu, "a": act1, "b": act2},
            ("omega", "nu", "a", "b"))
    if omega == 0.0:
        raise InvalidModelError("omega must be nonzero")
    if act1 <= 0.0 or act2 <= 0.0:
        raise InvalidModelError("seed actions a, b must be positive")
    if act1 == act2:
        raise InvalidModelError(
            "seed actions must differ (a == b collapses the momentum orbit structure)"
        )

    def eval_F(i, x, eps):
        q1, q2, q3 = x[..., 0], x[..., 1], x[..., 2]
        p1, p2, p3 = x[..., 3], x[..., 4], x[..., 5]
        if i == 1:
            return (0.5 * omega * (q1 * q1 + p1 * p1 + q2 * q2 + p2 * p2)
                    + 0.5 * nu * (q3 * q3 + p3 * p3)
                    + eps * (q1 * q1 + q2 * q2) * q3)
        return q1 * p2 - q2 * p1

    def grad_F(i, x, eps):
        q1, q2, q3 = x[..., 0], x[..., 1], x[..., 2]
        p1, p2, p3 = x[..., 3], x[..., 4], x[..., 5]
        if i == 1:
            return np.stack(
                (omega * q1 + 2.0 * eps * q1 * q3,
                 omega * q2 + 2.0 * eps * q2 * q3,
                 nu * q3 + eps * (q1 * q1 + q2 * q2),
                 omega * p1,
                 omega * p2,
                 nu * p3),
                axis=-1,
            )
        zero = np.zeros_like(q1)
        return np.stack((p2, -p1, zero, -q2, q1, zero), axis=-1)

    def hess_F(i, x, eps):
        h = np.zeros((6, 6))
        if i == 1:
            q1, q2, q3 = x[0], x[1], x[2]
            h[0, 0] = h[1, 1] = omega + 2.0 * eps * q3
            h[2, 2] = nu
            h[0, 2] = h[2, 0] = 2.0 * eps * q1
            h[1, 2] = h[2, 1] = 2.0 * eps * q2
            h[3, 3] = h[4, 4] = omega
            h[5, 5] = nu
        else:
            h[0, 4] = h[4, 0] = 1.0
            h[1, 3] = h[3, 1] = -1.0
        return h

    # Angles zero in the circular modes: zeta_- = sqrt(2a), zeta_+ = sqrt(2b).
    base = np.array([np.sqrt(act1) + np.sqrt(act2), 0.0, 0.0,
                     0.0, np.sqrt(act2) - np.sqrt(act1), 0.0])
    beta0 = np.array([omega * (act1 + act2), act2 - act1])
    A = np.array([[omega, omega], [-1.0, 1.0]])
    B = np.array([[nu], [0.0]])
    fd = FrequencyData(A, B)
    lattice = 2.0 * np.pi * np.linalg.inv(A.T)
    alpha = np.array([1, 0])
    seed = TorusSeed(base, beta0, alpha, lattice[:, 0].copy(), lattice, spec.name)
    sys = HamiltonianSystem(
        3, 2, eval_F, grad_F, hess_F, vectorized=True, name=spec.name,
        selftest_points=base[None, :] + 0.05,
    )
    return sys, seed, fd


def make_system(spec: ModelSpec):
    """Instantiate a model: (HamiltonianSystem, TorusSeed, FrequencyData).

    The FrequencyData is exact at eps = 0 on the seed torus.
    """
    if spec.name == "action_oscillators":
        return _make_action_oscillators(spec)
    if spec.name == "lyapunov":
        return _make_lyapunov(spec)
    return _make_isotropic_momentum(spec)


def _actions_from_beta(spec: ModelSpec, beta, eps):
    beta = np.asarray(beta, dtype=float)
    if spec.name == "action_oscillators":
        omega = np.asarray(spec.params["omega"], dtype=float)
        a = np.asarray(spec.params.get("a", np.ones(spec.n)), dtype=float)
        s = spec.s
        acts = np.zeros(s)
        acts[1:] = beta[1:]
        rhs = beta[0] - float(omega[1:s] @ acts[1:] + eps * (a[1:s] @ acts[1:] ** 2))
        i1 = rhs / omega[0]
        for _ in range(60):  # Newton on the scalar level equation
            f = omega[0] * i1 + eps * a[0] * i1 * i1 - rhs
            df = omega[0] + 2.0 * eps * a[0] * i1
            step = f / df
            i1 -= step
            if abs(step) < 1e-14 * (1.0 + abs(i1)):
                break
        acts[0] = i1
        return acts
    if spec.name == "lyapunov":
        return np.array([beta[0] / float(spec.params.get("omega1", 1.0))])
    omega = float(spec.params.get("omega", 1.0))
    return np.array([(beta[0] / omega - beta[1]) / 2.0,
                     (beta[0] / omega + beta[1]) / 2.0])


def _frequency_matrices(spec: ModelSpec, beta, eps):
    """A(beta, eps), B(beta, eps) where closed forms exist."""
    if spec.name == "action_oscillators":
        omega = np.asarray(spec.params["omega"], dtype=float)
        a = np.asarray(spec.params.get("a", np.ones(spec.n)), dtype=float)
        n, s = spec.n, spec.s
        acts = _actions_from_beta(spec, beta, eps)
        A = np.zeros((s, s))
        A[0, :] = omega[:s] + 2.0 * eps * a[:s] * acts
        for i in range(1, s):
            A[i, i] = 1.0
        B = np.zeros((s, n - s))
        B[0, :] = omega[s:]  # transverse actions are zero on these tori
        return A, B
    if eps != 0.0:
        raise UnsupportedOracleError(
            f"no closed-form frequencies for {spec.name} at eps != 0"
        )
    if spec.name == "lyapunov":
        return (np.array([[float(spec.params.get("omega1", 1.0))]]),
                np.array([[float(spec.params.get("nu", np.sqrt(2.0)))]]))
    omega = float(spec.params.get("omega", 1.0))
    nu = float(spec.params.get("nu", np.sqrt(2.0)))
    return np.array([[omega, omega], [-1.0, 1.0]]), np.array([[nu], [0.0]])


def oracle(spec: ModelSpec, query: str, beta=None, eps: float = 0.0, alpha=None):
    """Closed-form ground truth for acceptance tests.

    query is one of 'rho', 'multipliers', 'frequencies', 'twist_det'.
    Raises UnsupportedOracleError where no closed form is claimed.
    """
    if query == "rho":
        if spec.name != "action_oscillators":
            raise UnsupportedOracleError(
                f"no closed-form transverse fixed point for {spec.name}"
            )
        return np.zeros(2 * (spec.n - spec.s))
    if query == "multipliers":
        if alpha is None:
            raise ValueError("multipliers query needs alpha")
        A, B = _frequency_matrices(spec, beta, eps)
        q = B.T @ np.linalg.solve(A.T, np.asarray(alpha, dtype=float))
        mults = [1.0 + 0.0j] * (2 * spec.s)
        for qj in q:
            mults.append(np.exp(2j * np.pi * qj))
            mults.append(np.exp(-2j * np.pi * qj))
        return np.array(mults)
    if query == "frequencies":
        A, _ = _frequency_matrices(spec, beta, eps)
        return A[0, :].copy()
    if query == "twist_det":
        if spec.name != "action_oscillators":
            raise UnsupportedOracleError(
                f"no closed-form twist determinant for {spec.name}"
            )
        a = np.asarray(spec.params.get("a", np.ones(spec.n)), dtype=float)
        return float((2.0 * eps) ** spec.s * np.prod(a[: spec.s]))
    raise UnsupportedOracleError(f"unknown oracle query {query!r}")
