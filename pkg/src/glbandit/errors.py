"""Exception types shared across the package."""


class GlbError(Exception):
    """Base class for all glbandit errors."""


class DomainError(GlbError, ValueError):
    """A numeric argument is outside the function's domain (e.g. non-finite)."""


class ConfigError(GlbError, ValueError):
    """Invalid configuration value (bad family name, S <= 0, delta outside (0,1], ...)."""


class ContractViolation(GlbError, ValueError):
    """A caller broke a documented precondition (oversized arm, c <= 0, empty action set)."""


class NumericError(GlbError, ArithmeticError):
    """Numerical failure inside an otherwise valid computation (e.g. non-PD matrix)."""


class ArmFileError(GlbError, ValueError):
    """Malformed arm file; carries the offending 1-based line number when known."""

    def __init__(self, message, line=None):
        if line is not None:
            message = f"line {line}: {message}"
        super().__init__(message)
        self.line = line
