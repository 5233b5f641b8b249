"""
Exception hierarchy shared by all packages.

The harness maps these onto exit statuses (see config.settings):
- DomainError and subclasses -> 1
- NumericError and subclasses -> 2
- InvariantFailure -> 3
"""


class SigConcError(Exception):
    """Base class for every error raised by this project."""


class DomainError(SigConcError, ValueError):
    """A precondition of an operation was violated."""


class NotLieElementError(DomainError):
    """A tensor could not be expressed in the Lyndon basis within tolerance."""

    def __init__(self, degree: int, residual: float, tolerance: float):
        self.degree = degree
        self.residual = residual
        self.tolerance = tolerance
        super().__init__(
            f"not a Lie element: degree-{degree} residual {residual:.3e} "
            f"exceeds tolerance {tolerance:.3e}"
        )


class ConfigError(DomainError):
    """Experiment configuration failed validation."""

    def __init__(self, message: str, validation_result=None):
        self.validation_result = validation_result
        super().__init__(message)


class NumericError(SigConcError, ArithmeticError):
    """A numerical routine broke down."""


class FitError(NumericError):
    """A statistical fit could not be carried out on the given data."""


class SamplingError(NumericError):
    """Rejection sampling exhausted its attempt budget."""


class InvariantFailure(SigConcError):
    """One or more ERROR-severity invariant checks failed."""

    def __init__(self, failed_checks):
        self.failed_checks = list(failed_checks)
        names = ", ".join(check.check_id for check in self.failed_checks)
        super().__init__(f"invariant check(s) failed: {names}")
