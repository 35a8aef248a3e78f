"""Numerical persistence checks and continuation of invariant tori.

The toolkit verifies, for a Hamiltonian system on R^{2n} with s
integrals of motion in involution, the hypotheses under which an
invariant s-torus persists in an s-parameter family under perturbation,
and then continues that family numerically:

* involution and independence checks of the integrals (``hamiltonian``),
* flows, composed flows and period vectors (``flow``),
* monodromy matrices, Floquet multipliers and the unit-multiplier
  multiplicity test (``floquet``),
* the algebraic nondegeneracy criteria for reducible tori
  (``reducible``),
* the section return map, fixed-point solver and grid continuation
  (``continuation``),
* built-in oracle models (``models``) and a config-driven CLI (``cli``).
"""

from . import continuation, errors, floquet, flow, hamiltonian, models, numerics, reducible
from .continuation import (
    AdaptedChart,
    ContinuationOptions,
    TorusFamily,
    TorusRecord,
    build_chart,
    continue_family,
    frequency_twist,
    return_map,
    sample_torus,
    solve_torus,
)
from .floquet import MonodromyReport, basepoint_invariance, check_hypothesis_iii, monodromy
from .flow import FlowResult, PeriodVector, composed_flow, evolve, find_period_vector
from .hamiltonian import (
    HamiltonianSystem,
    HypothesisReport,
    check_hypotheses,
    poisson_bracket,
    sample_neighborhood,
    symplectic_matrix,
    vector_field,
)
from .models import ModelSpec, TorusSeed, make_system, oracle
from .numerics import det, eigenvalues, newton_solve, orthonormal_complement
from .reducible import (
    CriterionResult,
    FrequencyData,
    compute_Q,
    determinant_criterion,
    lyapunov_specialization,
    search_alpha,
)

__version__ = "0.1.0"
