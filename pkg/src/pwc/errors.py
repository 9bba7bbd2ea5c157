"""Exception hierarchy shared by all modules."""


class PWCError(Exception):
    """Base class for every error raised by this package."""


class DomainError(PWCError, ValueError):
    """A point lies outside the domain of a map."""


class InvalidMapError(PWCError, ValueError):
    """Map data violates a structural invariant."""


class BadParameterError(PWCError, ValueError):
    """The shift lies in the finite bad set of the mod-1 family."""


class UnsupportedError(PWCError, ValueError):
    """The operation does not apply to this kind of map."""


class DegenerateSlopeError(PWCError, ValueError):
    """A zero-slope branch makes a preimage set-valued."""


class NotAContractionError(PWCError, ValueError):
    """A composed slope has absolute value >= 1."""


class InconsistencyError(PWCError, RuntimeError):
    """An internal certificate check failed where it should be impossible."""


class NonGenericError(PWCError, ValueError):
    """The parameters sit on a non-generic coincidence (e.g. a fixed point on a partition boundary)."""


class BudgetError(PWCError, ValueError):
    """A requested enumeration exceeds its budget."""


class TheoremViolation(PWCError, AssertionError):
    """A proven orbit-count bound failed. Always indicates a bug."""
