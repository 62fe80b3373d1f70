"""Slater-type trial functions for the planar dipole problem.

A trial function is a polynomial in r and cos(theta), optionally times
sin(theta), damped by exp(-alpha*r).  The exponent alpha is not part of
the basis description: every matrix element is assembled at alpha = 1
and rescaled afterwards, so a basis function is fully determined by its
symmetry sector and the integer powers (p, j) of r and cos(theta).
"""

from __future__ import annotations

from dataclasses import dataclass
from enum import Enum

from .errors import InvalidArgumentError


class Parity(str, Enum):
    """Symmetry sector under reflection theta -> -theta."""

    EVEN = "even"
    ODD = "odd"


def as_parity(value: Parity | str) -> Parity:
    """Coerce a string to :class:`Parity`, mapping bad values to our error type."""
    try:
        return Parity(value)
    except ValueError:
        raise InvalidArgumentError(f"parity must be 'even' or 'odd', got {value!r}") from None


@dataclass(frozen=True)
class BasisFunction:
    """One trial function r**p * cos(theta)**j * [sin(theta)] * exp(-alpha*r).

    Attributes:
        parity: symmetry sector the function belongs to.
        p: power of r.  Zero only for the bare exponential in the even sector;
            every polynomial member has p >= 1.
        j: power of cos(theta).
        sin_factor: whether a single sin(theta) factor is present.  True for
            every odd-sector function and false otherwise, kept explicit so a
            function record is self-describing.
    """

    parity: Parity
    p: int
    j: int
    sin_factor: bool

    def __post_init__(self) -> None:
        if self.p < 0 or self.j < 0:
            raise InvalidArgumentError(f"powers must be nonnegative, got p={self.p} j={self.j}")
        if self.sin_factor != (self.parity is Parity.ODD):
            raise InvalidArgumentError("sin_factor is required exactly in the odd sector")
        if self.parity is Parity.ODD and self.p == 0:
            raise InvalidArgumentError("odd-sector functions need p >= 1")
        if self.parity is Parity.EVEN and self.p == 0 and self.j != 0:
            raise InvalidArgumentError("the bare exponential carries no angular factor")

    @property
    def degree(self) -> int:
        """Total polynomial degree p + j used for ordering and truncation."""
        return self.p + self.j


def enumerate_basis(parity: Parity | str, K: int) -> list[BasisFunction]:
    """Enumerate the truncated basis of the given sector.

    The polynomial members are indexed by i >= 0, j >= 0 with i + j <= K - 1
    and carry r**(i+1) * cos(theta)**j; the even sector additionally starts
    with the bare exponential (p = j = 0).  Members are ordered by total
    degree p + j, ties broken by ascending i, so truncating the list at any
    point keeps all lower-degree functions.

    Args:
        parity: symmetry sector.
        K: truncation order; the maximum total degree of a member.

    Returns:
        The ordered basis, of length (K*K + K + 2)/2 in the even sector and
        K*(K + 1)/2 in the odd sector (the even sector has the one extra
        bare-exponential member).

    Raises:
        InvalidArgumentError: if K < 1.
    """
    parity = as_parity(parity)
    if K < 1:
        raise InvalidArgumentError(f"K must be a positive integer, got {K}")
    out: list[BasisFunction] = []
    if parity is Parity.EVEN:
        out.append(BasisFunction(parity, 0, 0, False))
    pairs = [(i, j) for i in range(K) for j in range(K - i)]
    pairs.sort(key=lambda ij: (ij[0] + 1 + ij[1], ij[0]))
    for i, j in pairs:
        out.append(BasisFunction(parity, i + 1, j, parity is Parity.ODD))
    return out


def basis_size(parity: Parity | str, K: int) -> int:
    """Closed-form length of :func:`enumerate_basis` without building it."""
    parity = as_parity(parity)
    if K < 1:
        raise InvalidArgumentError(f"K must be a positive integer, got {K}")
    if parity is Parity.EVEN:
        return (K * K + K + 2) // 2
    return K * (K + 1) // 2
