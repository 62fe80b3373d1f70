"""Per-state optimization of the variational exponent.

The n-th sorted pencil eigenvalue eps_n(alpha) is minimized over a bracket
with a safeguarded golden-section / parabolic-interpolation search (no
derivatives).  Because the reduced pencil is cached, one evaluation is a
single symmetric eigensolve; the search runs on the float64 downcast of
the reduced pencil by default, which locates the minimizer of the smooth,
nearly parabolic curve to far better than the requested interval width,
and only the final certified solve at alpha* runs at full precision.  The
flatness of eps at an interior minimum makes the reported eigenvalue
insensitive to the residual alpha error; the Hellmann-Feynman residual
recorded on every result quantifies exactly that.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from .assembly import ExactMatrixSet, assemble_cached
from .basis import Parity, as_parity, basis_size
from .eigen import Precision, Spectrum, float_pencil, quadratic_forms, spectrum
from .errors import BracketExhaustedError, InvalidArgumentError

DEFAULT_BRACKETS = {Parity.EVEN: (0.01, 5.0), Parity.ODD: (0.01, 2.0)}
_WIDEN_FACTOR = 4.0
_MAX_WIDENINGS = 3


@dataclass(frozen=True)
class OptResult:
    """Outcome of one exponent optimization.

    Attributes:
        state_index: 1-based index of the state within its sector.
        alpha_star: optimized exponent.
        epsilon: eigenvalue at alpha_star from the certifying full-precision
            solve (mpfr).
        stationarity: |2*alpha*<u,T1 u> + <u,V1 u>| / <u,S1 u> at alpha_star,
            which vanishes at an exact interior minimum.
        evaluations: number of eigenvalue evaluations spent in the search.
        spectrum: the full-precision spectrum at alpha_star, kept so callers
            can reuse the eigenvectors without re-solving.
    """

    state_index: int
    alpha_star: float
    epsilon: object
    stationarity: float
    evaluations: int
    spectrum: Spectrum


class _EdgeMinimum(Exception):
    def __init__(self, x: float):
        self.x = x


def _brent_min(f, a: float, b: float, rel_tol: float, max_iter: int = 200):
    """Golden-section search with safeguarded parabolic steps on [a, b].

    Returns (x, fx, evaluations).  Raises _EdgeMinimum if the iterate
    converges onto either bracket end, which signals that the true
    minimizer lies at or beyond the edge.
    """
    invphi = 0.5 * (3.0 - math.sqrt(5.0))
    lo0, hi0 = a, b
    x = w = v = a + invphi * (b - a)
    fx = fw = fv = f(x)
    evals = 1
    d = e = b - a
    for _ in range(max_iter):
        mid = 0.5 * (a + b)
        tol = rel_tol * abs(x) + 1e-300
        tol2 = 2.0 * tol
        if abs(x - mid) <= tol2 - 0.5 * (b - a):
            break
        use_golden = True
        if abs(e) > tol:
            r = (x - w) * (fx - fv)
            q = (x - v) * (fx - fw)
            p = (x - v) * q - (x - w) * r
            q = 2.0 * (q - r)
            if q > 0.0:
                p = -p
            q = abs(q)
            e_prev = e
            e = d
            if abs(p) < abs(0.5 * q * e_prev) and q * (a - x) < p < q * (b - x):
                d = p / q
                u = x + d
                if (u - a) < tol2 or (b - u) < tol2:
                    d = math.copysign(tol, mid - x)
                use_golden = False
        if use_golden:
            e = (b - x) if x < mid else (a - x)
            d = invphi * e
        u = x + d if abs(d) >= tol else x + math.copysign(tol, d)
        fu = f(u)
        evals += 1
        if fu <= fx:
            if u < x:
                b = x
            else:
                a = x
            v, w, x = w, x, u
            fv, fw, fx = fw, fx, fu
        else:
            if u < x:
                a = u
            else:
                b = u
            if fu <= fw or w == x:
                v, w = w, u
                fv, fw = fw, fu
            elif fu <= fv or v == x or v == w:
                v, fv = u, fu
    # converged onto an end of the original bracket means the true minimum
    # sits there or beyond; the shrunken working interval always hugs x,
    # so the comparison must use the entry values
    if (x - lo0) <= 8.0 * rel_tol * max(abs(x), abs(lo0)) or (hi0 - x) <= 8.0 * rel_tol * max(
        abs(x), abs(hi0)
    ):
        raise _EdgeMinimum(x)
    return x, fx, evals


def optimize_alpha(
    m: ExactMatrixSet,
    n: int,
    bracket: tuple[float, float] | None = None,
    prec: Precision = Precision(),
    tol: float = 1e-6,
    coarse: bool = True,
) -> OptResult:
    """Minimize the n-th eigenvalue over the exponent inside one bracket.

    Args:
        m: assembled sector matrices.
        n: 1-based state index, n <= m.size.
        bracket: (lo, hi) with 0 < lo < hi; defaults to the sector bracket.
        prec: precision of the certifying final solve (and of the search
            itself when coarse is False).
        tol: relative width of the final alpha interval.
        coarse: search on the float64 pencil downcast (default); set False
            to run every search evaluation at full precision.

    Raises:
        BracketExhaustedError: the minimum sits at a bracket edge; the
            caller is expected to widen and retry.
        InvalidArgumentError: malformed bracket or state index.
    """
    if bracket is None:
        bracket = DEFAULT_BRACKETS[m.parity]
    lo, hi = float(bracket[0]), float(bracket[1])
    if not 0.0 < lo < hi:
        raise InvalidArgumentError(f"bracket must satisfy 0 < lo < hi, got ({lo}, {hi})")
    if not 1 <= n <= m.size:
        raise InvalidArgumentError(f"state index {n} outside 1..{m.size}")
    if not tol > 0:
        raise InvalidArgumentError(f"tol must be positive, got {tol}")

    cache: dict[float, float] = {}
    if coarse:
        Td, Vd = float_pencil(m, prec)

        def eps(al: float) -> float:
            got = cache.get(al)
            if got is None:
                got = float(np.linalg.eigvalsh(al * al * Td + al * Vd)[n - 1])
                cache[al] = got
            return got

    else:

        def eps(al: float) -> float:
            got = cache.get(al)
            if got is None:
                got = float(spectrum(m, al, prec).eigenvalues[n - 1])
                cache[al] = got
            return got

    try:
        alpha_star, _, evals = _brent_min(eps, lo, hi, tol)
    except _EdgeMinimum as hit:
        raise BracketExhaustedError(
            f"minimum of state {n} at alpha ~ {hit.x:.6g} sits on the bracket edge ({lo}, {hi})"
        ) from None

    final = spectrum(m, alpha_star, prec)
    u = final.coefficients[:, n - 1]
    tq, vq, sq = quadratic_forms(m, u, prec)
    stat = abs(2.0 * alpha_star * float(tq) + float(vq)) / float(sq)
    return OptResult(n, alpha_star, final.eigenvalues[n - 1], stat, evals, final)


def optimize_alpha_auto(
    m: ExactMatrixSet,
    n: int,
    bracket: tuple[float, float] | None = None,
    prec: Precision = Precision(),
    tol: float = 1e-6,
    coarse: bool = True,
) -> OptResult:
    """optimize_alpha with automatic bracket widening on edge hits.

    Each retry scales the bracket by 4 on both ends; after three widenings
    the edge error propagates to the caller.
    """
    if bracket is None:
        bracket = DEFAULT_BRACKETS[m.parity]
    lo, hi = float(bracket[0]), float(bracket[1])
    for attempt in range(_MAX_WIDENINGS + 1):
        try:
            return optimize_alpha(m, n, (lo, hi), prec, tol, coarse)
        except BracketExhaustedError:
            if attempt == _MAX_WIDENINGS:
                raise
            lo, hi = lo / _WIDEN_FACTOR, hi * _WIDEN_FACTOR
    raise AssertionError("unreachable")


def k_sweep(
    parity: Parity | str,
    n: int,
    K_list: list[int],
    prec: Precision = Precision(),
    tol: float = 1e-6,
    cache_dir=None,
    coarse: bool = True,
) -> list[tuple[int, float, object]]:
    """Optimize one state across a list of truncation orders.

    Brackets are warm-started around the previous optimum, since the
    optimal exponent drifts slowly with K.  Returns rows (K, alpha_star,
    epsilon); by variational nesting the epsilon column is nonincreasing.
    """
    parity = as_parity(parity)
    if not K_list:
        raise InvalidArgumentError("K_list is empty")
    if list(K_list) != sorted(set(K_list)):
        raise InvalidArgumentError("K_list must be strictly ascending")
    if K_list[0] < 1 or n > basis_size(parity, K_list[0]):
        raise InvalidArgumentError(f"state {n} does not exist at K={K_list[0]}")
    rows: list[tuple[int, float, object]] = []
    bracket: tuple[float, float] | None = None
    for K in K_list:
        m = assemble_cached(parity, K, cache_dir)
        res = optimize_alpha_auto(m, n, bracket, prec, tol, coarse)
        rows.append((K, res.alpha_star, res.epsilon))
        bracket = (res.alpha_star / 3.0, res.alpha_star * 3.0)
    return rows
