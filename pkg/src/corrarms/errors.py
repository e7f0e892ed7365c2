"""Exception hierarchy.

Every validation failure raised by the library derives from
:class:`CorrArmsError`, which is itself a ``ValueError`` so callers that
only care about "bad input" can catch the builtin.
"""


class CorrArmsError(ValueError):
    """Base class for all library errors."""


# matrix validation
class NotSquare(CorrArmsError):
    pass


class AsymmetricBeyondTolerance(CorrArmsError):
    pass


class DiagonalNotOne(CorrArmsError):
    pass


class NegativeEntry(CorrArmsError):
    pass


class NotPSD(CorrArmsError):
    pass


class NonUniqueOptimum(CorrArmsError):
    """More than one size-h subset attains the maximal correlation sum."""


# lower-bound family
class OrderingViolated(CorrArmsError):
    pass


class RhoOutOfRange(CorrArmsError):
    pass


# sampling
class EmptySubset(CorrArmsError):
    pass


class IndexOutOfRange(CorrArmsError, IndexError):
    pass


# estimators
class NoObservations(CorrArmsError):
    pass


# objective
class SubsetTooSmall(CorrArmsError):
    pass


class SizeMismatch(CorrArmsError):
    pass


class EnumerationCapExceeded(CorrArmsError):
    pass


class DomainError(CorrArmsError):
    pass


class DegenerateInstance(CorrArmsError):
    pass


# algorithms
class BudgetTooSmall(CorrArmsError):
    pass


class ParameterOrderViolated(CorrArmsError):
    pass


class MaxStepsExceeded(CorrArmsError):
    """SE-C hit its step cap before the active set shrank to h arms.

    The partial run is attached as ``outcome`` so callers can inspect the
    trace and sample counts.
    """

    def __init__(self, message, outcome=None):
        super().__init__(message)
        self.outcome = outcome


# theory
class SingularSigma0(CorrArmsError):
    pass


class SingularSigma1(CorrArmsError):
    pass


class DimensionMismatch(CorrArmsError):
    pass


# harness
class UnknownSuite(CorrArmsError):
    pass


class ConfigError(CorrArmsError):
    pass
