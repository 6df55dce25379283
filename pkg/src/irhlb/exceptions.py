"""Exception types raised across the package."""


class MatrixMarketError(ValueError):
    """Base class for Matrix Market ingestion failures."""


class MatrixMarketFormatError(MatrixMarketError):
    pass


class MatrixMarketBoundsError(MatrixMarketError):
    pass


class UnsupportedFormatError(MatrixMarketError):
    pass


class DimensionMismatchError(ValueError):
    pass


class NotPositiveDefiniteError(ArithmeticError):
    """Cholesky hit a pivot at or below the positivity threshold."""


class ConvergenceFailure(ArithmeticError):
    """A dense iterative kernel exhausted its sweep budget."""


class BreakdownError(ArithmeticError):
    """The starting vector lies in the null space of the operator."""


class PencilDegenerateError(ArithmeticError):
    pass


class ExtractionEmptyError(ArithmeticError):
    """No positive harmonic Ritz value was produced."""
