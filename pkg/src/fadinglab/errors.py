"""Exception hierarchy shared by every fadinglab module."""


class FadingLabError(Exception):
    """Base class for all library errors."""


class DomainError(FadingLabError, ValueError):
    """An argument lies outside the mathematical domain of a function."""


class ParameterError(FadingLabError, ValueError):
    """A parameter is malformed, out of the supported range or inconsistent."""


class UnsupportedPathError(FadingLabError, NotImplementedError):
    """The requested evaluator does not support this model.

    Raised, for instance, when the closed-form evaluator is asked for a
    non-integer Nakagami shape. The series evaluator covers those cases.
    """


class PrecisionError(FadingLabError, ArithmeticError):
    """Floating-point range exhausted; extended precision is required."""


class ConvergenceError(FadingLabError, ArithmeticError):
    """An expansion or iteration failed to converge.

    Attributes
    ----------
    tail : float or None
        Observed magnitude of the unconverged remainder, when known.
    """

    def __init__(self, message, tail=None):
        super().__init__(message)
        self.tail = tail


class NumericalError(FadingLabError, ArithmeticError):
    """A numerical procedure failed (non-finite value, stalled acceleration)."""

    def __init__(self, message, diagnostics=None):
        super().__init__(message)
        self.diagnostics = diagnostics or {}


class ConsistencyError(FadingLabError, ArithmeticError):
    """Two independent evaluation routes disagree beyond tolerance."""
