"""Exception types raised across the package."""


class ReservoirError(Exception):
    """Base class for all package errors."""


class InvalidDimensionError(ReservoirError, ValueError):
    pass


class InvalidModeError(ReservoirError, ValueError):
    pass


class InvalidConfigError(ReservoirError, ValueError):
    pass


class DivergenceError(ReservoirError, ArithmeticError):
    """A trajectory produced non-finite values.

    Attributes:
        last_error: last finite value of the monitored error quantity.
    """

    def __init__(self, message: str, last_error: float = float("nan")):
        super().__init__(message)
        self.last_error = last_error


class ParseError(ReservoirError, ValueError):
    """Malformed serialized input; ``field`` names the offending entry."""

    def __init__(self, message: str, field: str = ""):
        super().__init__(message)
        self.field = field


class ValidationError(ReservoirError, ValueError):
    """Well-formed input that violates a physical constraint (e.g. unitarity)."""

    def __init__(self, message: str, field: str = ""):
        super().__init__(message)
        self.field = field
