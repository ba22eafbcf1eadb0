"""Exceptions shared across the package."""


class InvalidInput(ValueError):
    """Raised when an argument violates an operation's contract."""


class OutOfWindow(ValueError):
    """Raised when a tail-bound is evaluated outside its validity window."""
