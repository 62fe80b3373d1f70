"""Exact rational building blocks for all matrix elements.

Every matrix element between two trial functions factorizes into a radial
integral of r**n * exp(-2r) and an angular integral of a cosine power,
optionally times sin(theta)**2.  Both have rational closed forms, so the
Gram and operator matrices can be assembled exactly over the rationals.
Results carry gmpy2.mpq values; the angular integral is reported with a
factor 1/pi pulled out, which cancels in every generalized eigenproblem.
"""

from __future__ import annotations

import gmpy2
from gmpy2 import mpq

from .errors import InvalidArgumentError

# Exact rational scalar used throughout the package.  gmpy2.mpq is
# interchangeable with fractions.Fraction but markedly faster at the
# operand sizes produced by fraction-free elimination.
Rational = mpq


def angular_integral(m: int, s: int) -> Rational:
    """(1/pi) * Integral over a full turn of cos(theta)**m * sin(theta)**s.

    For s = 0 this is the Wallis value 2*binom(m, m/2)/2**m for even m and
    zero for odd m.  The only other case needed is s = 2, obtained from
    sin**2 = 1 - cos**2.

    Args:
        m: cosine power, m >= 0.
        s: sine power, 0 or 2.

    Raises:
        InvalidArgumentError: if m < 0 or s is not 0 or 2.
    """
    if m < 0:
        raise InvalidArgumentError(f"cosine power must be nonnegative, got {m}")
    if s == 0:
        if m % 2:
            return mpq(0)
        return mpq(2 * gmpy2.bincoef(m, m // 2), 2**m)
    if s == 2:
        return angular_integral(m, 0) - angular_integral(m + 2, 0)
    raise InvalidArgumentError(f"sine power must be 0 or 2, got {s}")


def radial_integral(n: int) -> Rational:
    """Integral of r**n * exp(-2r) over r >= 0, equal to n!/2**(n+1).

    The weight exp(-2r) is the product of the two unit-exponent Slater
    factors; n already includes the r from the area element.

    Raises:
        InvalidArgumentError: if n < 0.
    """
    if n < 0:
        raise InvalidArgumentError(f"radial power must be nonnegative, got {n}")
    return mpq(gmpy2.fac(n), 2 ** (n + 1))
