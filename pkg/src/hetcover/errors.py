"""Exception types shared across the package."""


class ValidationError(ValueError):
    """Inputs violate a documented precondition or invariant."""


class DomainError(ValueError):
    """A query point lies outside the supported domain."""


class SingularityError(DomainError):
    """A derivative was requested at a point where it diverges."""
