"""Exception types raised by the library.

All of them derive from ValueError so callers that only care about
"bad input" can catch one thing.
"""


class DomainError(ValueError):
    """An argument lies outside the mathematical domain of a function."""


class InvalidCorrelationError(ValueError):
    """A correlation parameter or matrix cannot define a valid distribution."""


class NonPSDError(InvalidCorrelationError):
    pass


class DimensionMismatchError(ValueError):
    pass


class PortIndexError(ValueError):
    """A port index falls outside the fluid-antenna grid."""


class InfeasibleConfigurationError(ValueError):
    """SINR thresholds cannot be met at any SNR with the given power split."""

    def __init__(self, message, *, user=None, stream=None, bound=None):
        super().__init__(message)
        self.user = user
        self.stream = stream
        self.bound = bound


class ConfigError(ValueError):
    """A run configuration could not be parsed or validated."""
