"""Exception types shared across the package.

Every failure mode that a caller can meaningfully react to gets its own
class; anything else surfaces as ValueError from the constructor that
detected it.
"""


class HardyLabError(Exception):
    """Base class for all package-specific errors."""


class ResolutionError(HardyLabError):
    """Grid too coarse for the requested computation."""


class ConditioningError(HardyLabError):
    """A linear system (dual-basis Gram matrix) is numerically singular."""


class ParameterError(HardyLabError):
    """Exponent or index parameters outside their admissible range."""


class TruncationError(HardyLabError):
    """A tail integral cannot be certified from the gridded data alone."""


class TailDivergenceError(HardyLabError):
    """A requested analytic tail bound diverges for the given exponents."""


class NyquistError(HardyLabError):
    """Requested frequency range exceeds what the grid spacing resolves."""


class ConfigError(HardyLabError):
    """Malformed run configuration (CLI or serialized input)."""
