"""Adapted section charts, the torus return map, and family continuation.

The construction mirrors the implicit-function argument that proves
persistence: at a base point m of an invariant torus, build the affine
section

    Sigma_m = m + span(G | E),   G = [grad F_i(m)],  E = (span T+G)^perp,

transverse to the flow directions T = [X_i(m)].  The return map sends
section coordinates (beta, y) through three stages: lift to the F-level
beta, apply the composed flow over the period vector c, and flow back
along the group directions until the point re-enters the section
(quotienting the flow drift explicitly, which is what makes the result
independent of position along the orbit).  A fixed point y* of
y -> yhat(beta, y) marks the invariant torus at level beta; Newton
continuation walks a (beta, eps) grid outward from the seed.
"""

from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np

from .errors import (
    ChartOverflowError,
    DegeneratePointError,
    GeometryError,
    NoConvergenceError,
    NondegeneracyFailure,
    ToruskitError,
)
from .flow import PeriodVector, composed_flow_states, evolve_states, find_period_vector
from .hamiltonian import HamiltonianSystem, apply_J
from .numerics import eigenvalues, orthonormal_complement

__all__ = [
    "AdaptedChart",
    "TorusRecord",
    "TorusFamily",
    "ContinuationOptions",
    "build_chart",
    "return_map",
    "ReturnTransit",
    "solve_torus",
    "solve_lattice",
    "continue_family",
    "sample_torus",
    "SampleReport",
    "flow_invariance_defect",
    "isotropy_defect",
    "frequency_twist",
    "TwistReport",
]


@dataclass
class AdaptedChart:
    """Frames of the affine section chart based at a torus point.

    T: flow directions X_i(m); G: gradients of the integrals; E:
    orthonormal basis of span(T|G)^perp (the transverse coordinates y);
    W: orthonormal basis of span(G|E)^perp, so p in Sigma_m iff
    W^T (p - m) = 0.
    """

    base: np.ndarray
    T: np.ndarray
    G: np.ndarray
    E: np.ndarray
    W: np.ndarray
    beta0: np.ndarray
    eps: float


@dataclass
class ContinuationOptions:
    fixed_point_tol: float = 1e-9
    margin_tol: float = 1e-6
    rtol: float = 1e-10
    atol: float = 1e-12
    newton_max_iter: int = 30
    lift_tol: float = 1e-12
    project_tol: float = 1e-12
    period_tol: float = 1e-9


def build_chart(sys: HamiltonianSystem, m, eps: float) -> AdaptedChart:
    """Build the adapted section frames at m.

    Requires the 2s columns [X_1..X_s | grad F_1..grad F_s] to have full
    rank (smallest singular value > 1e-8); otherwise the torus or the
    integrals are degenerate at m.
    """
    m = np.asarray(m, dtype=float)
    G = sys.grad_matrix(m, eps)
    T = apply_J(G.T).T
    TG = np.hstack((T, G))
    sv = np.linalg.svd(TG, compute_uv=False)
    if sv[-1] <= 1e-8:
        raise DegeneratePointError(
            f"flow/gradient frame rank deficient at base point (sv_min={sv[-1]:.3e})"
        )
    E = orthonormal_complement(TG)
    W = orthonormal_complement(np.hstack((G, E)))
    beta0 = np.array([float(sys.F(i, m, eps)) for i in range(1, sys.s + 1)])
    return AdaptedChart(base=m, T=T, G=G, E=E, W=W, beta0=beta0, eps=eps)


@dataclass
class ReturnTransit:
    """Intermediate data of one return-map evaluation."""

    lift_coeffs: np.ndarray
    section_x: np.ndarray
    mapped_x: np.ndarray
    theta: np.ndarray
    projected_x: np.ndarray


def _lift(sys, chart, beta, y, eps, tol, max_iter=30):
    """Solve F(m + G a + E y) = beta for a (Newton, analytic Jacobian)."""
    s = sys.s
    base = chart.base + (chart.E @ y if y.size else 0.0)
    a = np.zeros(s)
    for _ in range(max_iter):
        x = base + chart.G @ a
        r = np.array([float(sys.F(i, x, eps)) for i in range(1, s + 1)]) - beta
        if np.max(np.abs(r)) < tol:
            return a, x
        jac = sys.grad_matrix(x, eps).T @ chart.G
        try:
            step = np.linalg.solve(jac, -r)
        except np.linalg.LinAlgError as exc:
            raise ChartOverflowError(f"level lift Jacobian singular: {exc}") from exc
        if np.max(np.abs(step)) > 10.0:
            raise ChartOverflowError("level lift left the chart neighbourhood")
        a = a + step
    raise ChartOverflowError(
        f"level lift did not converge (last residual {np.max(np.abs(r)):.3e})"
    )


def _project(sys, chart, p, eps, tol, rtol, atol, theta_scale=1.0, max_iter=40):
    """Flow p backwards along the group until it lies on the section.

    Solves W^T (g^{-theta}(p) - m) = 0; the Jacobian column i is
    -W^T X_i at the current point (exact, by commutation), and theta is
    applied incrementally so each iteration integrates only the update.
    The drift theta can be a sizeable fraction of the period when the
    map's time vector was solved on a distant torus, so the runaway
    guards scale with the period.
    """
    s = sys.s
    z = np.asarray(p, dtype=float).copy()
    theta = np.zeros(s)
    step_cap = max(1.0, 0.75 * theta_scale)
    total_cap = max(2.0, 3.0 * theta_scale)
    r = chart.W.T @ (z - chart.base)
    for _ in range(max_iter):
        rnorm = float(np.max(np.abs(r)))
        if rnorm < tol:
            return theta, z
        xmat = np.column_stack(
            [apply_J(sys.grad(i, z, eps)) for i in range(1, s + 1)]
        )
        try:
            dtheta = np.linalg.solve(chart.W.T @ xmat, r)
        except np.linalg.LinAlgError as exc:
            raise ChartOverflowError(f"section projection singular: {exc}") from exc
        if np.max(np.abs(dtheta)) > step_cap or np.max(np.abs(theta + dtheta)) > total_cap:
            raise ChartOverflowError("section projection left the chart neighbourhood")
        # Damped step: W^T X vanishes a quarter turn away, so undamped
        # Newton can overshoot; halve until the residual decreases.
        lam = 1.0
        for _ in range(8):
            z_new = composed_flow_states(sys, z[None, :], -lam * dtheta, eps,
                                         rtol=rtol, atol=atol)[0]
            r_new = chart.W.T @ (z_new - chart.base)
            if np.max(np.abs(r_new)) < rnorm:
                break
            lam *= 0.5
        else:
            raise ChartOverflowError(
                f"section projection stalled (residual {rnorm:.3e})"
            )
        z = z_new
        theta = theta + lam * dtheta
        r = r_new
    raise ChartOverflowError(
        f"section projection did not converge (last residual {np.max(np.abs(r)):.3e})"
    )


def return_map(sys: HamiltonianSystem, chart: AdaptedChart, pv: PeriodVector,
               beta, y, eps: float, options: ContinuationOptions | None = None):
    """One evaluation of the section return map (beta, y) -> yhat.

    Returns (yhat, ReturnTransit).  Raises ChartOverflowError when the
    lift or the projection leaves the chart's validity neighbourhood.
    """
    opts = options or ContinuationOptions()
    beta = np.asarray(beta, dtype=float)
    y = np.asarray(y, dtype=float)
    a, x = _lift(sys, chart, beta, y, eps, opts.lift_tol)
    mapped = composed_flow_states(sys, x[None, :], pv.c, eps,
                                  rtol=opts.rtol, atol=opts.atol)[0]
    theta, z = _project(sys, chart, mapped, eps, opts.project_tol,
                        opts.rtol, opts.atol,
                        theta_scale=float(np.max(np.abs(pv.c))))
    yhat = chart.E.T @ (z - chart.base)
    return yhat, ReturnTransit(a, x, mapped, theta, z)


@dataclass
class TorusRecord:
    """One continued torus: section fixed point plus derived data."""

    beta: np.ndarray
    epsilon: float
    y_star: np.ndarray | None
    section_point: np.ndarray | None
    residual: float
    return_jacobian: np.ndarray | None
    frequencies: np.ndarray | None
    samples: np.ndarray | None = None
    period_lattice: np.ndarray | None = None
    lattice_pvs: list = field(default_factory=list)
    alpha: np.ndarray | None = None
    c: np.ndarray | None = None
    converged: bool = True
    status: str = "converged"
    message: str = ""


def solve_lattice(sys, point, guesses, eps, tol=1e-9, rtol=1e-10, atol=1e-12):
    """Period vectors for the basis classes e_1..e_s at a torus point.

    guesses holds the starting vector for class e_j in column j; returns
    (lattice matrix with solved c^{(j)} in column j, list of PeriodVector).
    """
    s = sys.s
    guesses = np.asarray(guesses, dtype=float)
    pvs = []
    lattice = np.empty((s, s))
    for j in range(s):
        alpha = np.zeros(s, dtype=int)
        alpha[j] = 1
        pv = find_period_vector(sys, point, alpha, guesses[:, j], eps,
                                tol=tol, rtol=rtol, atol=atol)
        pvs.append(pv)
        lattice[:, j] = pv.c
    return lattice, pvs


def _frequencies_from_lattice(lattice: np.ndarray, row: int = 1) -> np.ndarray:
    """Angle rates of integral `row` (1-based): row of 2*pi*(C^T)^{-1}."""
    a_full = 2.0 * np.pi * np.linalg.inv(lattice.T)
    return a_full[row - 1, :].copy()


def solve_torus(sys: HamiltonianSystem, chart: AdaptedChart, pv: PeriodVector,
                beta, eps: float, y_guess, lattice_guesses=None,
                options: ContinuationOptions | None = None) -> TorusRecord:
    """Newton solve of the fixed-point equation yhat(beta, y) = y.

    The multiplier margin is checked at the guess first: any eigenvalue
    of d(yhat)/dy within margin_tol of 1 raises NondegeneracyFailure
    (the continuation hypothesis fails there, or the tolerance is too
    tight).  When lattice_guesses is given, the period lattice is
    re-solved at the solution, frequencies are derived from it, and the
    return Jacobian is recomputed with the record's own class-alpha
    period vector so the secular factorization holds exactly.
    """
    opts = options or ContinuationOptions()
    beta = np.asarray(beta, dtype=float)
    y = np.asarray(y_guess, dtype=float).copy()
    d = 2 * (sys.n - sys.s)
    if y.shape != (d,):
        raise ValueError(f"y_guess shape {y.shape} != ({d},)")

    transit_box = {}

    def run_map(pvec):
        def mapped(yv):
            yhat, transit = return_map(sys, chart, pvec, beta, yv, eps, opts)
            transit_box["last"] = transit
            return yhat

        return mapped

    def newton_fixed_point(mapped, start, check_margin_at_start):
        """Newton on mapped(y) - y with forward FD Jacobians, h=1e-6(1+|y_j|)."""
        yv = start.copy()
        val = mapped(yv)
        jac = np.empty((d, d))
        for it in range(opts.newton_max_iter + 1):
            for j in range(d):
                h = 1e-6 * (1.0 + abs(yv[j]))
                shifted = yv.copy()
                shifted[j] += h
                jac[:, j] = (mapped(shifted) - val) / h
            if check_margin_at_start and it == 0:
                margins = np.abs(eigenvalues(jac) - 1.0)
                if np.any(margins < opts.margin_tol):
                    raise NondegeneracyFailure(
                        f"return-map multiplier within {opts.margin_tol:.1e} of 1 "
                        f"at the guess (min distance {margins.min():.3e}); the "
                        "multiplicity hypothesis fails here"
                    )
            res = val - yv
            if np.max(np.abs(res)) < opts.fixed_point_tol:
                return yv, jac.copy(), float(np.max(np.abs(res)))
            jac_newton = jac - np.eye(d)
            if np.linalg.cond(jac_newton) > 1e12:
                raise NondegeneracyFailure(
                    "I - d(return)/dy numerically singular at the iterate "
                    f"(cond > 1e12); multiplicity hypothesis violated or "
                    f"tolerance too tight"
                )
            yv = yv - np.linalg.solve(jac_newton, res)
            val = mapped(yv)
        raise NoConvergenceError(
            f"fixed-point Newton: no convergence after {opts.newton_max_iter} "
            f"iterations (residual {np.max(np.abs(val - yv)):.3e})"
        )

    current = run_map(pv)
    if d > 0:
        y_star, return_jac, _ = newton_fixed_point(current, y, True)
    else:
        y_star = y.copy()
        return_jac = np.zeros((0, 0))
    yhat = current(y_star)
    residual = float(np.max(np.abs(yhat - y_star))) if d > 0 else 0.0
    section = transit_box["last"].section_x

    lattice = None
    pvs = []
    freqs = None
    c_own = pv.c.copy()
    alpha = np.asarray(pv.alpha, dtype=int)
    if lattice_guesses is not None:
        # Re-solve the period lattice on the solved torus, then redo the
        # fixed point with the record's own class-alpha period vector.
        lattice, pvs = solve_lattice(sys, section, lattice_guesses, eps,
                                     tol=opts.period_tol, rtol=opts.rtol, atol=opts.atol)
        freqs = _frequencies_from_lattice(lattice, row=1)
        pv_own = find_period_vector(sys, section, alpha,
                                    lattice @ alpha.astype(float), eps,
                                    tol=opts.period_tol, rtol=opts.rtol, atol=opts.atol)
        c_own = pv_own.c
        current = run_map(pv_own)
        if d > 0:
            y_star, return_jac, _ = newton_fixed_point(current, y_star, False)
        yhat = current(y_star)
        residual = float(np.max(np.abs(yhat - y_star))) if d > 0 else 0.0
        section = transit_box["last"].section_x

    if d > 0:
        final_margins = np.abs(eigenvalues(return_jac) - 1.0)
        if np.any(final_margins < opts.margin_tol):
            raise NondegeneracyFailure(
                f"return-map multiplier within {opts.margin_tol:.1e} of 1 at the "
                f"solution (min distance {final_margins.min():.3e})"
            )
    return TorusRecord(
        beta=beta.copy(),
        epsilon=eps,
        y_star=y_star,
        section_point=section,
        residual=residual,
        return_jacobian=return_jac,
        frequencies=freqs,
        period_lattice=lattice,
        lattice_pvs=pvs,
        alpha=alpha,
        c=c_own,
        converged=True,
        status="converged",
    )


@dataclass
class TorusFamily:
    """Continuation records over a (beta, eps) grid with provenance."""

    nodes: list
    records: list
    provenance: list
    beta_grid: list
    eps_grid: list

    def converged(self):
        return [rec for rec in self.records if rec.converged]


def continue_family(sys: HamiltonianSystem, seed, beta_grid, eps_grid,
                    options: ContinuationOptions | None = None) -> TorusFamily:
    """Walk the (beta, eps) grid outward from the seed torus.

    Each node is attempted with the nearest solved record as predictor
    (its y* as the Newton guess, its period vectors as chain guesses).
    A node is only attempted while it is no farther from the solved set
    than from the failed set, so the family never extrapolates past the
    realized boundary; unreachable nodes are marked blocked.  Failures
    are recorded per node, never raised.
    """
    opts = options or ContinuationOptions()
    beta_grid = [np.asarray(b, dtype=float) for b in beta_grid]
    eps_grid = [float(e) for e in eps_grid]
    nodes = [(b, e) for e in eps_grid for b in beta_grid]
    n_nodes = len(nodes)

    chart = build_chart(sys, seed.base_point, 0.0)
    pv_seed = find_period_vector(sys, seed.base_point, seed.alpha, seed.c_guess, 0.0,
                                 tol=opts.period_tol, rtol=opts.rtol, atol=opts.atol)
    lattice_seed, _ = solve_lattice(sys, seed.base_point, seed.lattice_c_guesses, 0.0,
                                    tol=opts.period_tol, rtol=opts.rtol, atol=opts.atol)

    def axis_scale(values):
        vals = sorted(set(values))
        if len(vals) < 2:
            return 1.0
        return max(vals[k + 1] - vals[k] for k in range(len(vals) - 1))

    s = sys.s
    bscales = [axis_scale([float(b[k]) for b, _ in nodes]) for k in range(s)]
    escale = axis_scale([e for _, e in nodes])

    def dist(u, v):
        bu, eu = u
        bv, ev = v
        db = sum(((bu[k] - bv[k]) / bscales[k]) ** 2 for k in range(s))
        return np.sqrt(db + ((eu - ev) / escale) ** 2)

    records: list = [None] * n_nodes
    provenance = [-1] * n_nodes
    solved: list[int] = []
    failed: list[int] = []
    pending = set(range(n_nodes))
    seed_node = (seed.beta0, 0.0)

    while pending:
        best = None
        best_d = np.inf
        best_pred = -1
        for idx in pending:
            if solved:
                dists = [(dist(nodes[idx], nodes[j]), j) for j in solved]
                d_solved, pred = min(dists)
            else:
                d_solved, pred = dist(nodes[idx], seed_node), -1
            d_failed = min((dist(nodes[idx], nodes[j]) for j in failed), default=np.inf)
            if d_solved > d_failed + 1e-9:
                continue  # past the realized boundary
            if d_solved < best_d:
                best_d, best, best_pred = d_solved, idx, pred
        if best is None:
            for idx in sorted(pending):
                beta, eps = nodes[idx]
                records[idx] = TorusRecord(
                    beta=beta, epsilon=eps, y_star=None, section_point=None,
                    residual=np.nan, return_jacobian=None, frequencies=None,
                    converged=False, status="blocked",
                    message="unreached: all neighbours failed",
                )
            break
        pending.discard(best)
        beta, eps = nodes[best]
        if best_pred >= 0:
            pred_rec = records[best_pred]
            y_guess = pred_rec.y_star
            pv_in = PeriodVector(pred_rec.c, pred_rec.alpha, 0.0)
            lattice_in = pred_rec.period_lattice
            provenance[best] = best_pred
        else:
            y_guess = np.zeros(2 * (sys.n - sys.s))
            pv_in = pv_seed
            lattice_in = lattice_seed
        try:
            rec = solve_torus(sys, chart, pv_in, beta, eps, y_guess,
                              lattice_guesses=lattice_in, options=opts)
            records[best] = rec
            solved.append(best)
        except ToruskitError as exc:
            records[best] = TorusRecord(
                beta=beta, epsilon=eps, y_star=None, section_point=None,
                residual=np.nan, return_jacobian=None, frequencies=None,
                converged=False, status="failed",
                message=f"{type(exc).__name__}: {exc}",
            )
            failed.append(best)
    return TorusFamily(nodes=nodes, records=records, provenance=provenance,
                       beta_grid=beta_grid, eps_grid=eps_grid)


@dataclass
class SampleReport:
    """Level pinning and invariance diagnostics of a torus sample grid."""

    max_F_dev: float
    invariance_distance: float
    grid_per_cycle: int
    n_samples: int


def sample_torus(sys: HamiltonianSystem, record: TorusRecord, pvs, grid_per_cycle: int,
                 eps: float, rtol: float = 1e-10, atol: float = 1e-12):
    """Sample the torus of a converged record on a uniform lattice grid.

    samples[k_1, ..., k_s] = g^{L (k/N)}(section point) with L the matrix
    of period vectors (class e_j in column j).  Returns (samples array of
    shape (N,)*s + (2n,), thetas of shape (N,)*s + (s,), SampleReport).
    The invariance figure is the worst distance from g^c(sample) to the
    sample set; c is a lattice vector, so this is tight.
    """
    if not record.converged:
        raise ValueError("cannot sample a record that did not converge")
    N = int(grid_per_cycle)
    s = sys.s
    lattice = np.column_stack([np.asarray(pv.c, dtype=float) for pv in pvs])
    z0 = record.section_point
    pts = z0[None, :].copy()
    for j in range(s):
        dtau = lattice[:, j] / N
        blocks = [pts]
        cur = pts
        for _ in range(N - 1):
            cur = composed_flow_states(sys, cur, dtau, eps, rtol=rtol, atol=atol)
            blocks.append(cur)
        pts = np.vstack(blocks)
    # Flat index is (k_s, ..., k_1) row-major; reorder to (k_1, ..., k_s).
    grid = pts.reshape((N,) * s + (sys.dim,))
    grid = grid.transpose(tuple(reversed(range(s))) + (s,))
    idx = np.indices((N,) * s).astype(float) / N
    thetas = np.moveaxis(idx, 0, -1)

    flat = grid.reshape(-1, sys.dim)
    devs = np.zeros(flat.shape[0])
    beta = record.beta
    for i in range(1, s + 1):
        vals = np.asarray(sys.F(i, flat, eps), dtype=float)
        devs = np.maximum(devs, np.abs(vals - beta[i - 1]))
    max_dev = float(devs.max())

    if record.c is not None:
        images = composed_flow_states(sys, flat, record.c, eps, rtol=rtol, atol=atol)
        inv_dist = 0.0
        for start in range(0, images.shape[0], 256):
            chunk = images[start:start + 256]
            d = np.abs(chunk[:, None, :] - flat[None, :, :]).max(axis=2).min(axis=1)
            inv_dist = max(inv_dist, float(d.max()))
    else:
        inv_dist = np.nan
    report = SampleReport(max_dev, inv_dist, N, flat.shape[0])
    return grid, thetas, report


def flow_invariance_defect(sys: HamiltonianSystem, samples, thetas, lattice,
                           i: int, t: float, eps: float,
                           rtol: float = 1e-10, atol: float = 1e-12) -> float:
    """Worst distance of g_i^t(sample) from the sampled torus.

    Each image g_i^t(sample(theta)) equals the torus point at parameter
    theta + delta with delta = L^{-1} t e_i; references are built at the
    wrapped parameter (mod 1), so the figure genuinely tests that the
    period lattice closes orbits at arbitrary torus points.
    """
    s = sys.s
    flat = np.asarray(samples, dtype=float).reshape(-1, sys.dim)
    th = np.asarray(thetas, dtype=float).reshape(-1, s)
    lattice = np.asarray(lattice, dtype=float)
    e_i = np.zeros(s)
    e_i[i - 1] = 1.0
    delta = np.linalg.solve(lattice, t * e_i)
    images = evolve_states(sys, i, flat, t, eps, rtol=rtol, atol=atol)
    shifted = th + delta
    wraps = np.floor(shifted)
    defect = 0.0
    for k in np.unique(wraps, axis=0):
        mask = np.all(wraps == k, axis=1)
        tau = lattice @ (delta - k)
        refs = composed_flow_states(sys, flat[mask], tau, eps, rtol=rtol, atol=atol)
        defect = max(defect, float(np.max(np.abs(images[mask] - refs))))
    return defect


def isotropy_defect(samples, n: int) -> float:
    """Worst |u^T J v| over the sample grid for spectral tangents u, v.

    u and v are the derivatives of the torus embedding along the first
    two lattice directions, computed by Fourier differentiation on the
    periodic grid.  Invariant tori of commuting Hamiltonian flows are
    isotropic, so this should vanish.
    """
    grid = np.asarray(samples, dtype=float)
    s = grid.ndim - 1
    if s < 2:
        return 0.0

    def spectral_derivative(arr, axis):
        m = arr.shape[axis]
        freqs = np.fft.fftfreq(m, d=1.0 / m)
        if m % 2 == 0:
            freqs[m // 2] = 0.0  # drop the Nyquist mode for derivatives
        coef = np.fft.fft(arr, axis=axis)
        shape = [1] * arr.ndim
        shape[axis] = m
        coef *= (2j * np.pi * freqs).reshape(shape)
        return np.real(np.fft.ifft(coef, axis=axis))

    u = spectral_derivative(grid, 0)
    v = spectral_derivative(grid, 1)
    uq, up = u[..., :n], u[..., n:]
    vq, vp = v[..., :n], v[..., n:]
    pairing = np.sum(uq * vp - up * vq, axis=-1)
    return float(np.max(np.abs(pairing)))


@dataclass
class TwistEntry:
    beta: np.ndarray
    eps: float
    twist_det: float
    degenerate: bool


@dataclass
class TwistReport:
    """Frequency-to-action twist determinants over the family grid."""

    kappa: int
    entries: list
    sign_stable: bool
    all_degenerate: bool
    degenerate_tol: float


def frequency_twist(sys: HamiltonianSystem, family: TorusFamily, kappa: int = 1,
                    degenerate_tol: float = 1e-6) -> TwistReport:
    """Twist matrix d(omega_kappa)/d(actions) by central differences.

    Frequencies come from each record's period lattice (row kappa of
    2*pi*(C^T)^{-1}); beta-derivatives are converted to action
    derivatives with the full frequency matrix at the centre node, whose
    rows are exactly d(beta)/d(actions).  Needs at least three converged
    nodes along every beta axis at fixed eps.
    """
    s = sys.s
    if not 1 <= kappa <= s:
        raise ValueError(f"kappa {kappa} out of range 1..{s}")
    beta_grid = family.beta_grid
    if len(beta_grid) == 0:
        raise GeometryError("empty beta grid")

    axes = []
    for k in range(s):
        vals = np.array(sorted({round(float(b[k]), 12) for b in beta_grid}))
        if vals.size < 3:
            raise GeometryError(
                f"beta axis {k + 1} has {vals.size} values; central differences "
                "need at least 3"
            )
        diffs = np.diff(vals)
        if np.max(np.abs(diffs - diffs[0])) > 1e-9 * (1.0 + abs(diffs[0])):
            raise GeometryError(f"beta axis {k + 1} is not uniformly spaced")
        axes.append(vals)

    lookup = {}
    for idx, (b, e) in enumerate(family.nodes):
        key = tuple(round(float(x), 12) for x in b) + (round(float(e), 12),)
        lookup[key] = idx

    def node_at(ivec, e):
        key = tuple(float(axes[k][ivec[k]]) for k in range(s)) + (round(float(e), 12),)
        return lookup.get(key)

    def freq_row(idx):
        rec = family.records[idx]
        if rec is None or not rec.converged or rec.period_lattice is None:
            return None
        return _frequencies_from_lattice(rec.period_lattice, row=kappa)

    entries = []
    for e in family.eps_grid:
        counts = [len(ax) for ax in axes]
        for ivec in np.ndindex(*counts):
            if any(ivec[k] == 0 or ivec[k] == counts[k] - 1 for k in range(s)):
                continue
            centre = node_at(ivec, e)
            if centre is None or not family.records[centre].converged:
                continue
            D = np.empty((s, s))
            ok = True
            for j in range(s):
                up = list(ivec)
                dn = list(ivec)
                up[j] += 1
                dn[j] -= 1
                iu, idn = node_at(up, e), node_at(dn, e)
                fu = freq_row(iu) if iu is not None else None
                fd = freq_row(idn) if idn is not None else None
                if fu is None or fd is None:
                    ok = False
                    break
                step = axes[j][ivec[j] + 1] - axes[j][ivec[j]]
                D[:, j] = (fu - fd) / (2.0 * step)
            if not ok:
                continue
            rec = family.records[centre]
            a_full = 2.0 * np.pi * np.linalg.inv(rec.period_lattice.T)
            twist = D @ a_full
            tdet = float(np.linalg.det(twist))
            entries.append(TwistEntry(rec.beta.copy(), float(e), tdet,
                                      abs(tdet) <= degenerate_tol))
    if not entries:
        raise GeometryError("no interior grid node admits central differences")
    live = [ent.twist_det for ent in entries if not ent.degenerate]
    sign_stable = bool(live) and (all(v > 0 for v in live) or all(v < 0 for v in live))
    return TwistReport(
        kappa=kappa,
        entries=entries,
        sign_stable=sign_stable,
        all_degenerate=not live,
        degenerate_tol=degenerate_tol,
    )
