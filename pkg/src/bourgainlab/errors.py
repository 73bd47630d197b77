"""Exception types shared across the package."""


class BourgainLabError(Exception):
    """Base class for errors raised by this package."""


class PreconditionError(BourgainLabError, ValueError):
    """An operation was called outside its stated hypotheses."""


class BoundViolation(BourgainLabError, AssertionError):
    """A checked inequality failed.  ``details`` carries the witness."""

    def __init__(self, message, details=None):
        super().__init__(message)
        self.details = details or {}


class SearchExhausted(BourgainLabError, RuntimeError):
    """A randomized or iterative search ran out of budget."""

    def __init__(self, message, details=None):
        super().__init__(message)
        self.details = details or {}


class ConfigError(BourgainLabError, ValueError):
    """Malformed user configuration (group string, generator spec, ...)."""
