"""Exception types shared across the package."""


class GridPiteError(Exception):
    """Base class for all package errors."""


class ConfigError(GridPiteError):
    """Invalid or malformed scenario configuration (CLI exit code 2)."""


class NumericalFailure(GridPiteError):
    """Numerical breakdown: non-convergence or a vanishing success branch
    (CLI exit code 3)."""


class ConvergenceError(NumericalFailure):
    """Eigensolver failed to reach the residual tolerance."""

    def __init__(self, message, residuals=None):
        super().__init__(message)
        self.residuals = residuals
