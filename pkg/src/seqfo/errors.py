"""Exception types shared across the package."""


class SeqFOError(Exception):
    """Base class for all package errors."""


class EvaluationError(SeqFOError, ValueError):
    """A map returned a non-finite value."""

    def __init__(self, message, coordinate=None):
        super().__init__(message)
        self.coordinate = coordinate


class ConvergenceError(SeqFOError, RuntimeError):
    """Fixed-point iteration did not reach tolerance within max_iter."""

    def __init__(self, message, residual=None):
        super().__init__(message)
        self.residual = residual


class SingularityError(SeqFOError, ArithmeticError):
    """I - A is singular or too ill-conditioned to solve."""

    def __init__(self, message, condition=None, iterate=None):
        super().__init__(message)
        self.condition = condition
        self.iterate = iterate


class CertificateError(SeqFOError, ValueError):
    """A certificate formula received inputs that violate its preconditions."""


class AssumptionViolation(SeqFOError, ValueError):
    """Estimated constants contradict a standing assumption (e.g. rho_f >= 1)."""


class DimensionError(SeqFOError, ValueError):
    """Array shapes disagree with declared dimensions, or a size limit is hit."""
