"""Exception types shared across the package."""


class DomainError(ValueError):
    """An argument lies outside the domain where the quantity is defined."""


class ResourceCapError(RuntimeError):
    """An enumeration or recursion would exceed the configured size cap."""


class ConvergenceError(RuntimeError):
    """An iterative solver did not reach its tolerance.

    The best available estimate is attached as ``result`` so callers can
    still inspect diagnostics.
    """

    def __init__(self, message, result=None):
        super().__init__(message)
        self.result = result


class UnsupportedPatternError(ValueError):
    """A spin pattern lies outside the family with known closed forms."""
