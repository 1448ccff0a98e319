"""Exception types raised across the package."""


class ExpMidError(Exception):
    """Base class for all errors raised by :mod:`expmid`."""


class DimensionError(ExpMidError, ValueError):
    """Vector or operator shapes do not agree."""


class OperatorError(ExpMidError, ArithmeticError):
    """An operator could not be applied or inverted."""


class ConfigurationError(ExpMidError, ValueError):
    """Invalid parameters or problem setup."""


class RangeError(ExpMidError, ValueError):
    """A time argument lies outside the requested step."""


class DataError(ExpMidError, ValueError):
    """Input data cannot be processed (e.g. nonpositive error values)."""


class ConvergenceError(ExpMidError, RuntimeError):
    """An iterative procedure stopped before reaching its tolerance.

    Attributes
    ----------
    residual : float
        Last residual estimate (Krylov) or increment norm (fixed point).
    iterations : int
        Number of iterations performed.
    """

    def __init__(self, message, residual=float("nan"), iterations=0):
        super().__init__(message)
        self.residual = residual
        self.iterations = iterations
