"""Exception types shared across the toolkit."""


class PolyOptError(Exception):
    """Base class for all toolkit errors."""


class DimensionMismatchError(PolyOptError, ValueError):
    """Operands disagree on the number of variables or vector length."""


class ParseError(PolyOptError, ValueError):
    """A text artifact (polynomial, instance file, SDP file, certificate) is malformed."""


class FeasibilityError(PolyOptError, ValueError):
    """A point violates the constraints beyond tolerance.

    Carries the worst violation so callers can report it.
    """

    def __init__(self, message, worst_violation=None, constraint=None):
        super().__init__(message)
        self.worst_violation = worst_violation
        self.constraint = constraint


class LevelError(PolyOptError, ValueError):
    """A relaxation level below the minimum admissible one was requested."""

    def __init__(self, message, min_level=None):
        super().__init__(message)
        self.min_level = min_level


class DegenerateDualError(PolyOptError, ValueError):
    """The dual vector cannot be normalized into a moment sequence (y0 ~ 0)."""
