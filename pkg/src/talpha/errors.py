"""Exception hierarchy shared by all modules."""


class TalphaError(Exception):
    """Base class for library errors."""


class DomainError(TalphaError, ValueError):
    """Argument outside the domain where a formula is valid."""


class PoleError(DomainError):
    """Evaluation at a pole (gamma at non-positive integers, ...)."""


class SingularityError(DomainError):
    """Kernel evaluated at its singular point."""


class DegenerateParameterError(DomainError):
    """Parameter combination excluded by the construction (integer cases)."""


class DegenerateFitError(TalphaError, ValueError):
    """Least-squares fit cannot be formed from the samples."""


class ConvergenceError(TalphaError, ArithmeticError):
    """Iteration budget exhausted before the requested accuracy."""


class IntegrationError(TalphaError, ArithmeticError):
    """Integrand evaluation failed at a quadrature node."""

    def __init__(self, message, node=None):
        super().__init__(message)
        self.node = node


class AccuracyWarning(UserWarning):
    """Quadrature or finite differences are likely under-resolved."""
