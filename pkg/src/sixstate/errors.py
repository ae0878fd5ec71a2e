"""Exception types shared across the package."""


class SixStateError(Exception):
    """Base class for all errors raised by this package."""


class DomainError(SixStateError, ValueError):
    """An argument lies outside the mathematical domain of an operation."""


class CapacityError(SixStateError, RuntimeError):
    """A brute-force computation would exceed its configured size guard."""


class BracketError(DomainError):
    """A root-finding interval does not bracket a sign change."""
