"""Exception hierarchy for the qdipole package.

Every error raised on a documented failure path derives from
:class:`QdipoleError`, so callers (and the command line driver) can map
failure classes to exit codes without string matching.
"""

from __future__ import annotations


class QdipoleError(Exception):
    """Base class for all package-specific errors."""


class InvalidArgumentError(QdipoleError, ValueError):
    """An argument is outside the documented domain of an operation."""


class ConvergenceError(QdipoleError, RuntimeError):
    """An iterative solver exhausted its iteration budget.

    Attributes:
        residual: best residual (or off-diagonal norm) seen, when known.
    """

    def __init__(self, message: str, residual: float | None = None):
        super().__init__(message)
        self.residual = residual


class BracketExhaustedError(QdipoleError, RuntimeError):
    """A minimizer kept hitting the bracket edge after every allowed widening."""


class InternalInconsistencyError(QdipoleError, RuntimeError):
    """An invariant that should hold by construction was violated.

    Raised, for example, when a Gram matrix that must be positive definite
    produces a nonpositive pivot during factorization.
    """


class CacheError(QdipoleError):
    """Base class for matrix cache load failures."""


class CacheVersionError(CacheError):
    """The cache file declares an unsupported format version."""


class CacheFormatError(CacheError):
    """The cache file is structurally malformed."""


class CacheChecksumError(CacheError):
    """The cache file payload does not match its recorded checksum."""
