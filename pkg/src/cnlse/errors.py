"""Exception types shared across the solver."""


class CnlseError(Exception):
    """Base class for all solver errors."""


class InvalidStateError(CnlseError):
    """A field state contains NaN or Inf entries."""


class BlowUpError(CnlseError):
    """A time step produced non-finite values (numerical instability)."""

    def __init__(self, message: str, time: float | None = None):
        super().__init__(message)
        self.time = time


class IterationFailureError(CnlseError):
    """The implicit fixed-point iteration failed to converge."""

    def __init__(self, message: str, iterations: int = 0, residual: float = float("nan")):
        super().__init__(message)
        self.iterations = iterations
        self.residual = residual


class SolverError(CnlseError):
    """The tridiagonal linear solve hit a singular system."""


class UnsupportedParametersError(CnlseError):
    """Requested analytic solution does not exist for these parameters."""


class ConfigError(CnlseError):
    """Scenario document could not be parsed or validated."""

    def __init__(self, message: str, line: int | None = None):
        if line is not None:
            message = f"line {line}: {message}"
        super().__init__(message)
        self.line = line
