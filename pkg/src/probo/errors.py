"""Exception types shared across the package."""


class ProboError(Exception):
    """Base class for all errors raised by this package."""


class DimensionMismatchError(ProboError):
    """An input point does not match the dimension a model or spec expects."""

    def __init__(self, expected: int, got: int, what: str = "point"):
        self.expected = expected
        self.got = got
        super().__init__(f"{what} has dimension {got}, expected {expected}")


class ConditioningError(ProboError):
    """Kernel matrix factorization failed even after jitter escalation."""

    def __init__(self, message: str, jitter: float):
        self.jitter = jitter
        super().__init__(message)


class ConfigError(ProboError):
    """A run or experiment configuration is invalid."""
