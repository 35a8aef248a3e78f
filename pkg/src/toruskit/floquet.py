"""Monodromy matrices, Floquet multipliers, and the multiplicity test.

For a closed orbit t -> g^{tc}(m) the monodromy is the Jacobian of the
time-c composed flow at m; its eigenvalues are the Floquet multipliers.
The multiplier 1 always appears with multiplicity at least 2s (s flow
directions plus s conserved levels); the continuation hypothesis is that
it is exactly 2s.  Multiplicity is counted as the number of multipliers
inside the disk |lambda - 1| < tol_unit, a cluster count, which is the
numerical surrogate for algebraic multiplicity (Jordan structure of the
2s block is not resolved).
"""

from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np

from .flow import PeriodVector, composed_flow
from .hamiltonian import HamiltonianSystem
from .numerics import eigenvalues, spectral_distance

__all__ = [
    "MonodromyReport",
    "monodromy",
    "HypothesisIIIResult",
    "check_hypothesis_iii",
    "basepoint_invariance",
]


@dataclass
class MonodromyReport:
    """Monodromy matrix with its spectrum and unit-multiplier count."""

    monodromy: np.ndarray
    multipliers: np.ndarray
    unit_multiplicity: int
    tol_unit: float
    base_point: np.ndarray


def monodromy(sys: HamiltonianSystem, m, pv: PeriodVector, eps: float,
              tol_unit: float = 1e-6, rtol: float = 1e-10, atol: float = 1e-12) -> MonodromyReport:
    """Monodromy dg^c(m) of the closed orbit through m and its multipliers.

    Requires pv.residual < 1e-8 so the orbit actually closes; tol_unit
    (default 1e-6) is the disk radius for counting unit multipliers and
    is deliberately separate from the eigensolver tolerance.
    """
    if pv.residual >= 1e-8:
        raise ValueError(
            f"period vector residual {pv.residual:.3e} too large; orbit does not close"
        )
    m = np.asarray(m, dtype=float)
    res = composed_flow(sys, m, pv.c, eps, variational=True, rtol=rtol, atol=atol)
    mults = eigenvalues(res.jacobian)
    unit = int(np.count_nonzero(np.abs(mults - 1.0) < tol_unit))
    return MonodromyReport(
        monodromy=res.jacobian,
        multipliers=mults,
        unit_multiplicity=unit,
        tol_unit=tol_unit,
        base_point=m,
    )


@dataclass
class HypothesisIIIResult:
    """Verdict on 'multiplier 1 has multiplicity exactly 2s'."""

    passed: bool
    unit_multiplicity: int
    expected: int
    offending: list = field(default_factory=list)
    numerical_warning: bool = False


def check_hypothesis_iii(report: MonodromyReport, s: int) -> HypothesisIIIResult:
    """Pass iff the unit multiplier count equals 2s.

    A count below 2s is analytically impossible, so it is flagged as a
    numerical warning rather than a meaningful failure.  On failure the
    diagnostics list the offending multipliers and their distance to 1.
    """
    expected = 2 * s
    unit = report.unit_multiplicity
    passed = unit == expected
    offending = []
    if not passed:
        dist = np.abs(report.multipliers - 1.0)
        order = np.argsort(dist)
        for idx in order[: max(unit, expected) + 2]:
            offending.append((complex(report.multipliers[idx]), float(dist[idx])))
    return HypothesisIIIResult(
        passed=passed,
        unit_multiplicity=unit,
        expected=expected,
        offending=offending,
        numerical_warning=unit < expected,
    )


def basepoint_invariance(sys: HamiltonianSystem, m_list, pv: PeriodVector, eps: float,
                         tol_unit: float = 1e-6, rtol: float = 1e-10, atol: float = 1e-12) -> float:
    """Max pairwise multiset distance between spectra along one torus.

    The monodromies at different base points of the same torus are
    conjugate, so their spectra must agree; the returned number is the
    worst greedy-matching distance over all pairs of points.
    """
    spectra = [
        monodromy(sys, m, pv, eps, tol_unit=tol_unit, rtol=rtol, atol=atol).multipliers
        for m in m_list
    ]
    worst = 0.0
    for a in range(len(spectra)):
        for b in range(a + 1, len(spectra)):
            worst = max(worst, spectral_distance(spectra[a], spectra[b]))
    return worst
