"""Exception hierarchy shared by all modules."""


class SccaError(Exception):
    """Base class for errors raised by sccasupp."""


class NotPositiveDefinite(SccaError, ValueError):
    pass


class ClassViolation(SccaError, ValueError):
    """A model fails one of the class conditions A2, A4 or A5."""


class InvalidSparsity(SccaError, ValueError):
    pass


class CholeskyFailure(SccaError, ArithmeticError):
    pass


class SqrtFailure(SccaError, ArithmeticError):
    pass


class DimensionMismatch(SccaError, ValueError):
    pass


class SingularCovariance(SccaError, ArithmeticError):
    pass


class MissingTruth(SccaError, ValueError):
    pass


class InvalidS(SccaError, ValueError):
    pass


class SvdFailure(SccaError, ArithmeticError):
    pass


class RankDeficient(SccaError, ArithmeticError):
    """The sandwiched matrix has fewer than ``r`` nonzero singular values.

    ``padded`` holds the available directions with zero columns appended, so
    callers that prefer to degrade rather than abort can keep going.
    """

    def __init__(self, message, padded=None, rank=0):
        super().__init__(message)
        self.padded = padded
        self.rank = rank


class DegenerateTruth(SccaError, ValueError):
    pass


class PreconditionViolated(SccaError, ValueError):
    pass


class NotUnitNorm(SccaError, ValueError):
    pass


class FamilyTooSmall(SccaError, ValueError):
    pass


class TooLarge(SccaError, ValueError):
    pass


class ConfigError(SccaError, ValueError):
    pass
