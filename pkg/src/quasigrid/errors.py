"""Exception hierarchy shared by all quasigrid modules."""


class QuasigridError(Exception):
    """Base class for all errors raised by this package."""


class SingularMatrixError(QuasigridError):
    """A matrix that must be invertible has determinant zero."""


class DimensionMismatchError(QuasigridError):
    """Operands live in different ambient dimensions."""


class DomainError(QuasigridError):
    """A requested ball exceeds the region a point set is known complete on."""


class BudgetError(QuasigridError):
    """An enumeration would visit more candidates than the configured budget."""


class FormatError(QuasigridError):
    """A file or token does not follow one of the canonical text formats."""
