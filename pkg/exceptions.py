"""Custom exceptions for polytomo."""

from __future__ import annotations


class PolytomoError(Exception):
    """Base exception for polytomo."""


class ContractError(PolytomoError, ValueError):
    """Input violates an operation's preconditions."""


class DimensionError(ContractError):
    """Array shapes do not match."""


class NotPSDError(ContractError):
    """Matrix has an eigenvalue below the clipping tolerance."""


class DataLoadError(PolytomoError):
    """Error loading data files."""


class NumericError(PolytomoError):
    """A numeric routine failed (e.g. SVD did not converge)."""


class BoundaryStateError(NumericError):
    """A protocol row has zero intensity at the true state."""


class AmbiguityError(NumericError):
    """Largest singular value is degenerate, so normalization is ambiguous."""


class RankDeficitError(PolytomoError):
    """Requested rank is inconsistent with the state's spectrum."""


class DegenerateStateError(PolytomoError):
    """All intensities of the protocol vanish for this state."""


class IncompleteProtocolError(PolytomoError):
    """Protocol does not identify every state parameter."""

    def __init__(self, q: int, s2: int) -> None:
        super().__init__(f"protocol is incomplete: q = {q} < s^2 = {s2}")
        self.q = q
        self.s2 = s2


class NotTestableError(PolytomoError):
    """Adequacy test needs a redundant protocol (dof > 0)."""


class UndefinedMomentError(PolytomoError):
    """Standardized moment requested for a zero-variance distribution."""


class MemoryGuardError(PolytomoError):
    """Tensor power would exceed the configured size cap."""


class ExportError(PolytomoError):
    """Output file could not be written."""
