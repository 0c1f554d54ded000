"""Exception hierarchy.

Every error raised by the package derives from :class:`SureSVTError`, and
input problems additionally derive from :class:`ValueError` so that callers
using plain ``except ValueError`` keep working.
"""


class SureSVTError(Exception):
    """Base class for all package errors."""


class NonFiniteError(SureSVTError, ValueError):
    """Input contains NaN or Inf."""


class ConvergenceFailure(SureSVTError, ArithmeticError):
    """The SVD did not converge or violated its quality contract."""


class UnsortedInputError(SureSVTError, ValueError):
    """Singular values were not non-increasing and nonnegative."""


class NotSimpleError(SureSVTError, ValueError):
    """Repeated singular values where a simple spectrum is required."""


class RankDeficientError(SureSVTError, ValueError):
    """A (numerically) zero singular value where full rank is required."""


class ThresholdTieError(SureSVTError, ValueError):
    """A singular value coincides with the threshold."""


class NonDifferentiablePointError(SureSVTError, ValueError):
    """The spectral function is not differentiable at a singular value."""


class AmbiguousSpectrumError(SureSVTError, ValueError):
    """A non-uniform spectral function was applied to a tied spectrum."""


class NonUniformFunctionError(SureSVTError, ValueError):
    """The repeated-spectrum divergence needs the same f for every index."""


class FZeroNotZeroError(SureSVTError, ValueError):
    """The repeated-spectrum divergence needs f(0) = 0."""


class StepTooSmallError(SureSVTError, ArithmeticError):
    """Finite-difference result is dominated by roundoff."""


class ShapeMismatchError(SureSVTError, ValueError):
    """Array shapes are inconsistent."""


class BadKindError(SureSVTError, ValueError):
    """Unknown test-matrix kind."""


class BadShapeError(SureSVTError, ValueError):
    """Requested dimensions are invalid."""


class BadBracketError(SureSVTError, ValueError):
    """Invalid search interval or tolerance."""
