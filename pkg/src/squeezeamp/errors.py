"""Exception types shared across the package."""


class SqueezeAmpError(Exception):
    """Base class for all package-specific errors."""


class DimensionMismatchError(SqueezeAmpError):
    """Operands live in incompatible Hilbert spaces."""


class TruncationError(SqueezeAmpError):
    """Too much state weight near the Fock-space truncation edge."""


class ConvergenceError(SqueezeAmpError):
    """An iterative computation failed its self-consistency check."""


class ConfigError(SqueezeAmpError):
    """A config file is malformed or missing required keys."""

    def __init__(self, message, key=None, line=None):
        super().__init__(message)
        self.key = key
        self.line = line
