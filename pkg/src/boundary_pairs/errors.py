"""Exception types raised by the library."""


class BoundaryPairError(ValueError):
    """Base class for all library errors."""


class DimensionMismatch(BoundaryPairError):
    pass


class NotSelfAdjoint(BoundaryPairError):
    pass


class Singular(BoundaryPairError):
    pass


class NotPSD(BoundaryPairError):
    pass


class GammaNotSurjective(BoundaryPairError):
    pass


class GraphModelError(BoundaryPairError):
    pass


class TooCloseToDirichletSpectrum(BoundaryPairError):
    pass


class TooCloseToNeumannSpectrum(BoundaryPairError):
    pass


class NotBlockStructured(BoundaryPairError):
    pass


class NegativeRobinParameter(BoundaryPairError):
    pass


class BoundaryMismatch(BoundaryPairError):
    pass


class SingularSum(BoundaryPairError):
    pass


class OutOfDomain(BoundaryPairError):
    pass


class WindowInsideDirichletPoint(BoundaryPairError):
    pass


class NotAnIsolatedHit(BoundaryPairError):
    pass


class ParseError(BoundaryPairError):
    pass


class SchemaViolation(BoundaryPairError):
    pass


class GridDensityWarning(UserWarning):
    """Sampling grid may be too coarse to separate neighbouring roots."""
