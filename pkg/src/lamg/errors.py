"""Exception types raised by the solver."""


class LamgError(Exception):
    """Base class for solver errors."""


class EmptyGraph(LamgError):
    pass


class NotALaplacian(LamgError):
    """Matrix violates symmetry or zero-row-sum structure."""


class SingularDiagonal(LamgError):
    pass


class DimensionMismatch(LamgError, ValueError):
    pass


class IncompatibleRHS(LamgError):
    """Right-hand side does not sum to zero."""


class Diverged(LamgError):
    """Residual grew beyond the divergence guard; ``stats`` holds the history."""

    def __init__(self, message, stats=None):
        super().__init__(message)
        self.stats = stats


class MatrixMarketError(LamgError, ValueError):
    """Malformed Matrix Market input; ``line`` is 1-based when known."""

    def __init__(self, message, line=None):
        if line is not None:
            message = f"line {line}: {message}"
        super().__init__(message)
        self.line = line
