"""Exception types shared across the library."""


class CokernelLabError(Exception):
    """Base class for all library-specific errors."""


class InvalidFactor(CokernelLabError):
    """An invariant factor was not an integer >= 2."""


class NonDivisibleChain(CokernelLabError):
    """Invariant factors do not form a divisibility chain d1 | d2 | ..."""


class GroupTooLarge(CokernelLabError):
    """Group order exceeds the enumeration cap."""


class NotSquare(CokernelLabError):
    """Operation requires a square matrix."""


class SingularMatrix(CokernelLabError):
    """Operation requires a nonsingular matrix."""


class OutOfRange(CokernelLabError):
    """Index or parameter outside its documented range."""


class WrongCardinality(CokernelLabError):
    """Subset has the wrong number of items."""


class NumericalDegeneracy(CokernelLabError):
    """Sampler state collapsed numerically and resampling did not recover."""


class BudgetExceeded(CokernelLabError):
    """Requested enumeration exceeds the configured budget."""


class ZeroMu(CokernelLabError):
    """Pair-convolution mass vanishes where the formula needs to divide by it."""


class BoundaryPoint(CokernelLabError):
    """Simplex point is not in the strict interior."""


class OutOfWindow(CokernelLabError):
    """Offset lies outside the admissible window."""


class SuiteFailure(CokernelLabError):
    """A diagnostics suite reported at least one failing check."""
