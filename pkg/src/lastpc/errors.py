"""Exception types raised across the package."""


class LastPCError(Exception):
    """Base class for all package errors."""


class InputError(LastPCError, ValueError):
    """Malformed, non-finite or out-of-domain input."""


class DegenerateError(LastPCError, ArithmeticError):
    """A computation is undefined for the given data (zero variance, zero pivot, ...)."""


class ConvergenceError(LastPCError, ArithmeticError):
    """An iterative solver ran out of sweeps.

    ``off_norm`` holds the off-diagonal Frobenius norm at exit.
    """

    def __init__(self, message, off_norm):
        super().__init__(message)
        self.off_norm = off_norm
