"""Exception hierarchy shared by all permlab modules."""


class PermLabError(Exception):
    """Base class for every error raised by permlab."""


class NotAPrimePower(PermLabError, ValueError):
    """The requested field order q is not p^k for any prime p."""


class TableCapExceeded(PermLabError, ValueError):
    """Extension-field table construction is capped at q <= 4096."""


class FieldMismatch(PermLabError, ValueError):
    """Elements or matrices from different fields were combined."""


class DivisionByZero(PermLabError, ZeroDivisionError):
    """Multiplicative inverse of zero was requested."""


class OutOfRange(PermLabError, IndexError):
    """A row/column index or deletion count is outside the valid range."""


class DuplicateIndex(PermLabError, ValueError):
    """An index set contains repeated entries."""


class NotSquare(PermLabError, ValueError):
    """A square-matrix operation was applied to a rectangular matrix."""


class SizeCap(PermLabError, ValueError):
    """The exact computation would exceed its configured size cap."""


class NotHollowSymmetric(PermLabError, ValueError):
    """Expected a symmetric matrix with all-zero diagonal."""


class BadWeights(PermLabError, ValueError):
    """Probability weights are negative or do not sum to one."""


class NonPrimeField(PermLabError, ValueError):
    """Non-uniform entry distributions are only defined over prime fields."""


class DegenerateDistribution(PermLabError, ValueError):
    """The entry distribution is (nearly) a point mass, rho too close to 1."""


class BadConfig(PermLabError, ValueError):
    """An experiment configuration violates its preconditions."""


class BadN(PermLabError, ValueError):
    """The claim being checked requires a larger matrix dimension n."""


class CharacteristicTwo(PermLabError, ValueError):
    """Permanent-distribution claims are only stated for odd characteristic."""


class ConditioningTooRare(PermLabError, RuntimeError):
    """Rejection sampling accepted too few samples to report an estimate."""


class ReplayMismatch(PermLabError, RuntimeError):
    """A stored growth trace disagrees with its deterministic re-derivation."""
