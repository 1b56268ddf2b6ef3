"""Shared exception types."""


class DomainError(ValueError):
    """Input outside the mathematical domain of an operation."""


class ResourceError(RuntimeError):
    """A configured table / step cap was exceeded."""


class TailBoundUnavailable(DomainError):
    """No rigorous series tail bound exists for the requested weight."""


class NumericAnomaly(RuntimeError):
    """A numeric leak detector tripped (e.g. inverse-CDF mass deficit)."""

    def __init__(self, msg, partial=None):
        super().__init__(msg)
        self.partial = partial


class StructuralError(RuntimeError):
    """A combinatorial-map structure violates the invariants an operation needs."""
