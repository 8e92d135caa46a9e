"""Exception types shared across the package."""


class ValidationError(ValueError):
    """Raised when an input violates a documented precondition."""


class CapacityError(ValidationError):
    """Raised when a problem size exceeds the configured qubit cap."""
