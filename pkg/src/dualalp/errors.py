"""Exception taxonomy shared by all dualalp modules."""


class DualAlpError(Exception):
    """Base class for all errors raised by this package."""


class InputShapeError(DualAlpError, ValueError):
    """An array argument has the wrong length or shape."""


class ParameterError(DualAlpError, ValueError):
    """A numeric parameter is outside its valid range."""


class CapacityError(DualAlpError):
    """An exact / dense operation was requested on a model too large for it."""


class ConvergenceError(DualAlpError):
    """An iterative routine failed to reach its tolerance.

    Carries the final residual so callers can decide whether the partial
    result is still usable.
    """

    def __init__(self, message: str, residual: float | None = None):
        super().__init__(message)
        self.residual = residual


class SamplingSupportError(DualAlpError):
    """A sampled point has zero sampling probability (internal invariant)."""


class ConfigError(DualAlpError, ValueError):
    """A run configuration is missing fields or fails validation."""
