"""Exception hierarchy.

Each error carries the CLI exit code it maps to, so the front end never
needs a lookup table of its own.
"""


class AiryGapError(Exception):
    exit_code = 1


class ValidationError(AiryGapError, ValueError):
    """Arguments violate a documented precondition."""

    exit_code = 2


class DomainError(ValidationError):
    """Argument outside the documented accuracy window."""


class ConfigError(ValidationError):
    """Discretization parameters that cannot deliver a usable scheme."""


class PreconditionError(ValidationError):
    pass


class ConvergenceError(AiryGapError, ArithmeticError):
    exit_code = 3


class NumericalError(AiryGapError, ArithmeticError):
    exit_code = 3


class SingularSystemError(NumericalError):
    pass


class ConditioningError(NumericalError):
    pass


class PoleEncountered(NumericalError):
    """The coupled Painleve solution left the bounded regime."""


class BoundaryMismatch(NumericalError):
    """Re-anchoring the boundary data moved the solution too much."""


class ToleranceError(AiryGapError, ArithmeticError):
    exit_code = 4


class VerificationFailed(AiryGapError):
    exit_code = 5
