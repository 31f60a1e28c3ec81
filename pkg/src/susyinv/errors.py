"""Exception types raised across the inversion pipeline."""


class InversionError(Exception):
    """Base class for every error raised by this package."""


class DomainError(InversionError, ValueError):
    """Argument outside the domain of an operation."""


class PoleOfKError(InversionError):
    """Phase shift is a multiple of pi, so the effective-range function diverges."""


class EvaluationError(InversionError):
    """A model evaluated to a non-finite value."""


class UnwrapError(InversionError):
    """Grid too coarse to follow the phase shift continuously."""


class RealAxisPoleError(InversionError):
    """The S-matrix has a pole on the real k axis."""


class InsufficientOrderError(InversionError):
    pass


class InfiniteScatteringLengthError(InversionError):
    pass


class IllDefinedERFError(InversionError):
    """Sum rules fail, so the k^(2l) factor does not cancel."""


class DegeneratePoleError(InversionError):
    pass


class DegenerateDegreeError(InversionError):
    """Leading coefficient of the pole polynomial vanishes."""

    def __init__(self, message, reduced_degree):
        super().__init__(message)
        self.reduced_degree = reduced_degree


class RootFindingError(InversionError):
    pass


class IllConditionedFitError(InversionError):
    pass


class UnsupportedPoleError(InversionError):
    """Complex (off imaginary axis) poles cannot be turned into a potential."""


class WronskianNodeError(InversionError):
    """The Wronskian vanishes at some radius; the pole set is inadmissible."""

    def __init__(self, message, radius=None):
        super().__init__(message)
        self.radius = radius


class NumericError(InversionError):
    pass


class InadmissibleShiftError(InversionError):
    pass


class UnsupportedSingularityError(InversionError):
    """Singularity strength nu < 0 at the origin."""


class NonMonotoneTailError(InversionError):
    pass


class MatchingError(InversionError):
    pass


class ConfigError(InversionError, ValueError):
    pass


class ParseError(InversionError, ValueError):
    def __init__(self, message, line=None):
        super().__init__(message if line is None else f"line {line}: {message}")
        self.line = line
