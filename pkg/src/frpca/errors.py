"""Exception types shared across the package."""


class DimensionMismatchError(ValueError):
    """Operand shapes do not conform."""


class RankDeficiencyError(ArithmeticError):
    """A basis extraction met a (numerically) rank-deficient block."""


class ConvergenceError(ArithmeticError):
    """An iterative solver hit its iteration cap."""


class MemoryGuardError(MemoryError):
    """A dense intermediate would exceed its configured size guard."""


class MatrixMarketError(ValueError):
    """Malformed Matrix Market input."""
