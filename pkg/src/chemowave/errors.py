"""Exception taxonomy shared across the package."""


class ChemowaveError(Exception):
    """Base class for all package errors."""


class DomainError(ChemowaveError, ValueError):
    """A parameter violates its mathematical domain (named inequality)."""


class GridMismatchError(ChemowaveError, ValueError):
    """Two fields that must share a grid do not."""


class NumericalError(ChemowaveError, RuntimeError):
    """A solver produced non-finite state or broke a guaranteed property."""


class ConfigError(ChemowaveError, ValueError):
    """Run configuration could not be parsed or validated."""
