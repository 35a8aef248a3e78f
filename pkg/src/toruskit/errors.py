"""Exception types shared across the toolkit.

Every failure mode that callers are expected to branch on gets its own
class; plain ValueError/IndexError are reserved for programming errors
(bad shapes, out-of-range integral indices).
"""


class ToruskitError(Exception):
    """Base class for all toolkit-specific failures."""


class DimensionError(ToruskitError, ValueError):
    """Matrix or vector dimensions incompatible with the operation."""


class NumericFailure(ToruskitError):
    """An iterative kernel failed to converge or violated a sanity bound."""


class DegenerateFrameError(ToruskitError):
    """Rank-deficient column set where a full-rank frame is required."""


class NondegeneracyFailure(ToruskitError):
    """A Jacobian that must be invertible is numerically singular.

    Raised by Newton solves when ``I - d(return)/dy`` (or the finite
    difference Jacobian itself) has condition estimate above 1e12: the
    numerical shadow of a violated multiplier-multiplicity hypothesis.
    """


class NoConvergenceError(ToruskitError):
    """Iteration budget exhausted without meeting the tolerance."""


class StiffnessError(ToruskitError):
    """Adaptive step size underflowed; the problem is too stiff here."""


class BlowUpError(ToruskitError):
    """Integration produced a non-finite state."""


class DegeneratePointError(ToruskitError):
    """Flows/gradients degenerate at the requested base point."""


class DegenerateTorusError(ToruskitError):
    """The s flow directions are rank deficient at the base point."""


class ChartOverflowError(ToruskitError):
    """A point left the validity neighbourhood of the adapted chart."""


class SingularFrequencyMatrixError(ToruskitError):
    """The tangential frequency matrix A is singular; criteria undefined."""


class InvalidModelError(ToruskitError, ValueError):
    """Model parameters violate the model's validity conditions."""


class UnsupportedOracleError(ToruskitError):
    """No closed form is claimed for the requested oracle query."""


class ConfigError(ToruskitError, ValueError):
    """Malformed or inconsistent run configuration; message names the key."""


class GeometryError(ToruskitError):
    """Grid geometry too coarse or irregular for the requested analysis."""
