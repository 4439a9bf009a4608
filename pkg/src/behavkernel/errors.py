"""Exception hierarchy shared by all modules."""


class BehavKernelError(Exception):
    """Base class for every error raised by this package."""


class ParseError(BehavKernelError, ValueError):
    pass


class DomainError(BehavKernelError, ValueError):
    pass


class DimensionError(BehavKernelError, ValueError):
    pass


class MaskError(BehavKernelError, ValueError):
    """A dense operation received a matrix with missing entries."""


class RankError(BehavKernelError, ArithmeticError):
    pass


class NoDataError(BehavKernelError, ValueError):
    pass


class GpeViolation(BehavKernelError, ArithmeticError):
    """The Hankel rank condition ``rank(H_d(w)) = md + n`` does not hold."""
