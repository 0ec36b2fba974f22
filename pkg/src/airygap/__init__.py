"""Multi-interval Airy-kernel Fredholm determinants, the coupled Painleve II
system that represents them, the distributions they encode, and GUE Monte
Carlo corroboration."""

__version__ = "0.1.0"

from .errors import (  # noqa: E402
    AiryGapError,
    BoundaryMismatch,
    ConditioningError,
    ConfigError,
    ConvergenceError,
    DomainError,
    NumericalError,
    PoleEncountered,
    PreconditionError,
    SingularSystemError,
    ToleranceError,
    ValidationError,
    VerificationFailed,
)
from .fredholm import (  # noqa: E402
    FredholmResult,
    PartitionSpec,
    QuadratureScheme,
    build_scheme,
    dlogF_dx,
    fredholm_det,
    generating_function,
    mixed_taylor_coefficients,
    resolvent_diag,
    s_derivatives,
)
from .painleve import CoupledPIISolution, solve_coupled_pii, tw_log_integral, verify_reduction  # noqa: E402
from .special_functions import airy_eval, airy_kernel, gauss_legendre, hermite_orthonormal  # noqa: E402
