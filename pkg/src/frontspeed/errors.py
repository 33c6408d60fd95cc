"""Exception hierarchy shared by all modules."""

from __future__ import annotations


class FrontSpeedError(Exception):
    """Base class for every error raised by the package."""


class ReactionSpecError(FrontSpeedError, ValueError):
    """A reaction description is malformed or violates f(0) = f(1) = 0."""


class ClassificationError(FrontSpeedError, ValueError):
    """The sign pattern of f matches none of the supported reaction classes."""


class InadmissibleTrial(FrontSpeedError, ValueError):
    """A trial function violates positivity or monotonicity requirements."""


class NumericalFailure(FrontSpeedError, RuntimeError):
    """A numerical kernel failed to converge.

    ``best_estimate`` carries whatever partial answer was available when the
    failure was detected (``None`` if there was none).
    """

    def __init__(self, message: str, best_estimate=None, diagnostics=None):
        super().__init__(message)
        self.best_estimate = best_estimate
        self.diagnostics = diagnostics or {}


class QuadratureError(NumericalFailure):
    pass


class ODEFailure(NumericalFailure):
    pass


class BracketError(NumericalFailure):
    """A bracketing search found no sign change, or a non-monotone predicate."""


class DivergentIntegral(FrontSpeedError, ValueError):
    """A weighted integral diverges for the requested parameters."""
