"""Exception types shared across the package."""


class GridcutError(Exception):
    """Base class for all errors raised by this package."""


class InputError(GridcutError, ValueError):
    """An argument violates an operation's preconditions."""


class CapacityError(GridcutError):
    """Problem size exceeds what the requested method can handle."""


class DomainError(GridcutError, ValueError):
    """A value is outside the mathematical domain of an operation."""
