"""Exception hierarchy.

Errors fall into three families that the CLI maps onto exit codes:
configuration problems (2), domain errors (3) and numerical failures (4).
"""


class ChiralWalkError(Exception):
    """Base class for all package errors."""

    exit_code = 3


class ConfigError(ChiralWalkError, ValueError):
    exit_code = 2


class DomainError(ChiralWalkError, ValueError):
    exit_code = 3


class NumericalError(ChiralWalkError, ArithmeticError):
    exit_code = 4


# graph construction
class DuplicateEdge(DomainError):
    pass


class SelfLoop(DomainError):
    pass


class IndexOutOfRange(DomainError, IndexError):
    pass


class NotHermitian(DomainError):
    pass


class InvalidParams(DomainError):
    pass


class InvalidBranchIndex(DomainError, IndexError):
    pass


class InvalidDecomposition(DomainError):
    pass


# chiral phases
class PhaseOnNonEdge(DomainError):
    pass


class SingleBranch(DomainError):
    pass


# propagation
class DimensionMismatch(DomainError):
    pass


class NotNormalized(DomainError):
    pass


class InvalidTimes(DomainError):
    pass


class ConvergenceDomain(DomainError):
    pass


class DecompositionFailure(NumericalError):
    pass


class IntegrationFailure(NumericalError):
    pass


class InvalidDensityMatrix(DomainError):
    pass


class TooLarge(DomainError):
    pass


# estimation
class NonMonotoneRange(DomainError):
    pass


class NonMonotoneTable(DomainError):
    pass


class DegenerateTrials(DomainError):
    pass
