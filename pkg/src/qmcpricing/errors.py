"""Exception types shared across the package."""


class DomainError(ValueError):
    """An input lies outside the domain where the operation is defined."""


class ResourceError(RuntimeError):
    """A requested register or enumeration exceeds the configured memory cap."""
