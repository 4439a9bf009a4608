"""Kernel representations, behaviors and data completion for LTI systems
measured with missing samples."""
from __future__ import annotations

from .behavior import (
    BehaviorBasis,
    GammaMatrix,
    Membership,
    behavior_basis,
    behavior_from_kernel,
    build_gamma,
    membership_test,
)
from .completion import (
    CompletionResult,
    Method,
    NuclearNormConfig,
    complete_exact,
    complete_nuclear_norm,
    relative_error,
)
from .errors import (
    BehavKernelError,
    DimensionError,
    DomainError,
    GpeViolation,
    MaskError,
    NoDataError,
    ParseError,
    RankError,
)
from .hankel import MaskedMatrix, build_extended_hankel, build_hankel, hankel_matrix
from .kernel_ident import IdentOutcome, KernelRep, Status, identify_exact, identify_noisy
from .lti import (
    StateSpaceModel,
    check_pe_mosaic,
    check_sample_observability,
    oracle_kernel,
    random_system,
    simulate,
)
from .numerics import DEFAULT_TOL, ToleranceConfig, numerical_rank, principal_angles
from .signals import (
    Complexity,
    IrregularSignal,
    MissingPattern,
    apply_pattern,
    parse_csv,
    write_csv,
)

__version__ = "0.1.0"
