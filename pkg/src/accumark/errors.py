"""Exception hierarchy for the pricing engine.

Every failure mode raised by the library derives from :class:`AccumarkError`
so callers can catch one base type at the CLI boundary.
"""


class AccumarkError(Exception):
    """Base class for all library errors."""


# --- mark law ---------------------------------------------------------------

class TiltOutOfDomain(AccumarkError):
    """Exponential tilt parameter reaches or exceeds the smallest rate."""


class MomentDiverges(AccumarkError):
    """Requested exponential moment lies outside the convergence strip."""


class DimensionMismatch(AccumarkError):
    """Parallel parameter lists disagree in length."""


# --- quadrature -------------------------------------------------------------

class InvalidAlpha(AccumarkError):
    """Laguerre weight exponent must exceed -1."""


class EigenFailure(AccumarkError):
    """Symmetric tridiagonal eigensolve did not converge."""


class RuleMismatch(AccumarkError):
    """Quadrature rule exponent does not match the mixture component."""


# --- interpolation ----------------------------------------------------------

class NonMonotoneGrid(AccumarkError):
    """Abscissae are not strictly increasing."""


class TooFewPoints(AccumarkError):
    """Interpolant needs at least two sample points."""


# --- implicit solver --------------------------------------------------------

class SingularMatrix(AccumarkError):
    """Zero pivot in the tridiagonal factorization."""


# --- transform inversion ----------------------------------------------------

class SupportNotCovered(AccumarkError):
    """Damped payoff tail is not negligible at the sampled-grid edge."""


class GridMismatch(AccumarkError):
    """Modal surface and transform were built on different frequency grids."""


# --- Monte Carlo ------------------------------------------------------------

class DominatedRateViolated(AccumarkError):
    """Intensity exceeded its majorant; indicates a flow bug, never expected."""


class BadWindow(AccumarkError):
    """Accumulation window is empty, reversed, or beyond the horizon."""


# --- calibration ------------------------------------------------------------

class DegenerateData(AccumarkError):
    """Samples cannot identify the mixture (all equal, or a weight collapsed)."""


class NonPositiveSample(AccumarkError):
    """Mark samples must be strictly positive."""


class GapNonPositive(AccumarkError):
    """log-mean minus mean-log gap must be positive for a Gamma fit."""


class BracketInvalid(AccumarkError):
    """Tilt search bracket is reversed or touches the divergence boundary."""


class ObjectiveNotFinite(AccumarkError):
    """Calibration objective evaluated to NaN or infinity."""
