"""Exception types shared across the package."""


class OnlineRKHSError(Exception):
    """Base class for all package errors."""


class DomainError(OnlineRKHSError, ValueError):
    """A sample point lies outside the domain of a feature map."""


class RepresentationError(OnlineRKHSError, ValueError):
    """A feature-space vector does not match the map or operation it is used with."""


class ParameterError(OnlineRKHSError, ValueError):
    """A numeric parameter violates the range required by an operation."""


class HorizonExceededError(OnlineRKHSError, IndexError):
    """A finite-horizon schedule was queried past its last step."""


class ConsistencyError(OnlineRKHSError, ArithmeticError):
    """An internal invariant of an exact recursion was violated."""


class FitError(OnlineRKHSError, ValueError):
    """A rate fit cannot be performed on the supplied records."""


class ConfigError(OnlineRKHSError, ValueError):
    """An experiment configuration is malformed or out of range."""
