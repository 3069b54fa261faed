class UnidentifiableError(ValueError):
    """The design cannot estimate every mean coordinate (singular information matrix)."""


class InfeasibleError(ValueError):
    """The feasible set of distributions is empty."""


class EnumerationCapError(ValueError):
    """Explicit enumeration would exceed the configured cap."""
