"""Exception hierarchy shared by all modules."""

from __future__ import annotations


class CheegerError(Exception):
    """Base class for errors raised by this package."""


class DegenerateShapeError(CheegerError, ValueError):
    """Raised when a polygon or point set has (numerically) zero area."""


class PreconditionError(CheegerError, ValueError):
    """Raised when an operation is called outside its domain."""


class ExponentError(PreconditionError):
    """Raised for an (N, q) pair outside the nontrivial window 0 < q < N/(N-1)."""


class RefineNError(PreconditionError):
    """Raised when the smoothing parameter n is too small for the inclusion bounds."""


class GeometryError(CheegerError):
    """Raised when a containment certificate fails."""


class ShapeFileError(CheegerError, ValueError):
    """Raised for malformed or invalid shape descriptions."""


class SuiteError(CheegerError):
    """The inequality suite could not be carried out."""
