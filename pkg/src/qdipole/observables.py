"""Wavefunctions, densities, the quartic coupling and unit conversion.

The eigen stage works with pencil vectors u normalized to u.S1.u = 1.
Physical expansion coefficients of psi = sum_m c_m phi_m at exponent alpha
follow by undoing the diagonal scaling, c_a = alpha**(p_a + 1) * u_a, and
dividing by sqrt(pi) so that the continuous norm of psi is exactly one.
Everything here consumes such coefficient vectors; the quartic coupling
integral of |psi|**4 is evaluated by a product quadrature that is exact
for the polynomial-times-exponential integrand by degree counting.
"""

from __future__ import annotations

from dataclasses import dataclass

import gmpy2
import numpy as np
from gmpy2 import mpfr

from .assembly import ExactMatrixSet
from .basis import BasisFunction, Parity
from .eigen import Precision, Spectrum
from .errors import InvalidArgumentError


@dataclass(frozen=True, eq=False)
class WaveFunction:
    """Expansion psi = sum_m coefficients[m] * phi_m at a fixed exponent.

    phi_m is the plain product r**p * cos(theta)**j * [sin(theta)] *
    exp(-alpha*r) without any normalization factor of its own.  norm_flag
    records that the continuous norm of psi is one.
    """

    basis: tuple[BasisFunction, ...]
    alpha: float
    coefficients: np.ndarray
    norm_flag: bool = False

    def __post_init__(self) -> None:
        if len(self.basis) != len(self.coefficients):
            raise InvalidArgumentError(
                f"{len(self.coefficients)} coefficients for {len(self.basis)} basis functions"
            )
        if not self.alpha > 0:
            raise InvalidArgumentError(f"alpha must be positive, got {self.alpha}")

    @property
    def parity(self) -> Parity:
        return self.basis[0].parity

    @property
    def max_degree(self) -> int:
        return max(f.degree for f in self.basis)


@dataclass(frozen=True, eq=False)
class DensityGrid:
    """|psi|**2 sampled on a uniform Cartesian grid.

    values[i, j] is the density at (x_i, y_j); state_label carries
    (parity, n, K, alpha) for file metadata.
    """

    extent: tuple[float, float, float, float]
    nx: int
    ny: int
    values: np.ndarray
    state_label: tuple

    def axes(self) -> tuple[np.ndarray, np.ndarray]:
        x0, x1, y0, y1 = self.extent
        return np.linspace(x0, x1, self.nx), np.linspace(y0, y1, self.ny)


@dataclass(frozen=True)
class PhysicalUnits:
    """Constants fixing the dimensionless-to-physical energy conversion."""

    hbar: float
    mass: float
    dipole_strength: float

    def __post_init__(self) -> None:
        if not (self.hbar > 0 and self.mass > 0 and self.dipole_strength > 0):
            raise InvalidArgumentError("all physical constants must be positive")


def state_wavefunction(m: ExactMatrixSet, spec: Spectrum, n: int) -> WaveFunction:
    """Normalized WaveFunction of state n from a solved spectrum.

    Applies the diagonal back-scaling to the pencil vector and the 1/sqrt(pi)
    from the angular measure, so the result is unit-normalized by
    construction (its norm_flag is set).
    """
    if (m.parity, m.size) != (spec.parity, spec.n_states):
        raise InvalidArgumentError("matrix set and spectrum describe different bases")
    _, u = spec.state(n)
    prec = spec.precision
    with prec.context():
        a = mpfr(spec.alpha)
        root_pi = gmpy2.sqrt(gmpy2.const_pi())
        coeff = np.array(
            [a ** (f.p + 1) * u_a / root_pi for f, u_a in zip(m.basis, u)],
            dtype=object,
        )
    return WaveFunction(m.basis, spec.alpha, coeff, norm_flag=True)


def eval_wavefunction(w: WaveFunction, r, theta, prec: Precision | None = None):
    """Value of psi at polar point (r, theta).

    Runs in float64 when prec is None, else in mpfr at prec bits.  r = 0
    is regular: only a p = 0 term can contribute there.
    """
    if r < 0:
        raise InvalidArgumentError(f"r must be nonnegative, got {r}")
    if prec is None:
        rf, ct, st = float(r), float(np.cos(theta)), float(np.sin(theta))
        damp = float(np.exp(-w.alpha * rf))
        total = 0.0
        for f, c in zip(w.basis, w.coefficients):
            term = float(c) * rf**f.p * ct**f.j
            if f.sin_factor:
                term *= st
            total += term
        return total * damp
    with prec.context():
        rf = mpfr(r)
        ct, st = gmpy2.cos(mpfr(theta)), gmpy2.sin(mpfr(theta))
        damp = gmpy2.exp(-mpfr(w.alpha) * rf)
        total = mpfr(0)
        for f, c in zip(w.basis, w.coefficients):
            term = mpfr(c) * rf**f.p * ct**f.j
            if f.sin_factor:
                term *= st
            total += term
        return total * damp


def _scaled_gram_quadratic(w: WaveFunction, m: ExactMatrixSet, prec: Precision) -> mpfr:
    """pi * c.(Delta S1 Delta).c for the wavefunction's coefficient vector."""
    with prec.context():
        a = mpfr(w.alpha)
        scaled = np.array(
            [mpfr(c) / a ** (f.p + 1) for f, c in zip(w.basis, w.coefficients)],
            dtype=object,
        )
        S1f = np.array([[mpfr(x) for x in row] for row in m.S1], dtype=object)
        return gmpy2.const_pi() * (scaled @ S1f @ scaled)


def normalize(w: WaveFunction, m: ExactMatrixSet, prec: Precision = Precision()) -> WaveFunction:
    """Rescale a wavefunction to unit continuous norm using the exact Gram matrix.

    Raises:
        InvalidArgumentError: if w.basis does not match m or the coefficient
            vector is zero.
    """
    if w.basis != m.basis:
        raise InvalidArgumentError("wavefunction basis does not match the matrix set")
    if all(c == 0 for c in w.coefficients):
        raise InvalidArgumentError("cannot normalize the zero vector")
    q = _scaled_gram_quadratic(w, m, prec)
    with prec.context():
        scale = 1 / gmpy2.sqrt(q)
        coeff = np.array([mpfr(c) * scale for c in w.coefficients], dtype=object)
    return WaveFunction(w.basis, w.alpha, coeff, norm_flag=True)


def laguerre_nodes(count: int, prec: Precision = Precision()) -> tuple[list, list]:
    """Gauss-Laguerre nodes and weights at working precision.

    float64 nodes seed a Newton iteration on the three-term recurrence,
    with the weight w_i = x_i / ((count+1) * L_{count+1}(x_i))**2; the sum
    of weights equals one.
    """
    if count < 1:
        raise InvalidArgumentError(f"node count must be positive, got {count}")
    seeds, _ = np.polynomial.laguerre.laggauss(count)
    nodes, weights = [], []
    with prec.context():
        stop = mpfr(2) ** (4 - prec.bits)
        for seed in seeds:
            x = mpfr(seed)
            for _ in range(80):
                prev, cur = mpfr(1), mpfr(1) - x
                for k in range(1, count):
                    prev, cur = cur, ((2 * k + 1 - x) * cur - k * prev) / (k + 1)
                slope = count * (cur - prev) / x
                dx = cur / slope
                x -= dx
                if abs(dx) <= abs(x) * stop:
                    break
            prev, cur = mpfr(1), mpfr(1) - x
            for k in range(1, count + 1):
                prev, cur = cur, ((2 * k + 1 - x) * cur - k * prev) / (k + 1)
            nodes.append(x)
            weights.append(x / ((count + 1) * cur) ** 2)
    return nodes, weights


def coupling_constant(
    w: WaveFunction,
    prec: Precision = Precision(),
    radial_nodes: int | None = None,
    angular_points: int | None = None,
) -> mpfr:
    """Quartic coupling g, the plane integral of |psi|**4.

    |psi|**4 is a polynomial of r-degree at most 4K (K the maximum total
    degree in the basis) times exp(-4*alpha*r), and a trigonometric
    polynomial of degree at most 4K in theta.  Gauss-Laguerre with
    2K + 3 nodes (after substituting t = 4*alpha*r) and the uniform
    trapezoid rule with 4K + 2 points therefore integrate it exactly up
    to rounding; both counts can be raised explicitly, which must leave
    the result unchanged.

    Raises:
        InvalidArgumentError: if w is not normalized.
    """
    if not w.norm_flag:
        raise InvalidArgumentError("coupling_constant needs a normalized wavefunction")
    K = w.max_degree
    nr = radial_nodes if radial_nodes is not None else 2 * K + 3
    nth = angular_points if angular_points is not None else 4 * K + 2
    if nr < 2 * K + 3 or nth < 4 * K + 2:
        raise InvalidArgumentError("node counts below the exactness threshold")
    xs, ws = laguerre_nodes(nr, prec)
    with prec.context():
        pi = gmpy2.const_pi()
        four_a = 4 * mpfr(w.alpha)
        thetas = [2 * pi * k / nth for k in range(nth)]
        cos_t = [gmpy2.cos(t) for t in thetas]
        sin_t = [gmpy2.sin(t) for t in thetas]
        odd = w.parity is Parity.ODD
        # coefficients grouped by cosine power: psi = sum_j A_j(r) cos^j
        max_j = max(f.j for f in w.basis)
        total = mpfr(0)
        for x, weight in zip(xs, ws):
            r = x / four_a
            rpow = [mpfr(1)]
            for _ in range(K):
                rpow.append(rpow[-1] * r)
            by_j = [mpfr(0)] * (max_j + 1)
            for f, c in zip(w.basis, w.coefficients):
                by_j[f.j] += mpfr(c) * rpow[f.p]
            ring = mpfr(0)
            for ct, st in zip(cos_t, sin_t):
                val = by_j[max_j]
                for jj in range(max_j - 1, -1, -1):
                    val = val * ct + by_j[jj]
                if odd:
                    val *= st
                ring += val**4
            total += weight * r * ring
        return total * (2 * pi / nth) / four_a


def density_grid(
    w: WaveFunction,
    extent: tuple[float, float, float, float],
    nx: int,
    ny: int,
    state_index: int | None = None,
) -> DensityGrid:
    """Sample |psi|**2 on a uniform Cartesian grid in float64.

    The x axis is the dipole axis (theta measured from it).  The origin is
    regular, so grids containing it need no special handling.

    Raises:
        InvalidArgumentError: for degenerate extent or fewer than 2 points
            per axis.
    """
    x0, x1, y0, y1 = (float(v) for v in extent)
    if not (x0 < x1 and y0 < y1):
        raise InvalidArgumentError(f"degenerate extent {extent}")
    if nx < 2 or ny < 2:
        raise InvalidArgumentError(f"grid must have at least 2 points per axis, got {nx}x{ny}")
    xs = np.linspace(x0, x1, nx)
    ys = np.linspace(y0, y1, ny)
    X, Y = np.meshgrid(xs, ys, indexing="ij")
    R = np.hypot(X, Y)
    theta = np.arctan2(Y, X)
    ct, st = np.cos(theta), np.sin(theta)
    psi = np.zeros_like(R)
    for f, c in zip(w.basis, w.coefficients):
        term = float(c) * R**f.p * ct**f.j
        if f.sin_factor:
            term = term * st
        psi += term
    psi *= np.exp(-w.alpha * R)
    label = (w.parity.value, state_index, w.max_degree, w.alpha)
    return DensityGrid((x0, x1, y0, y1), nx, ny, psi**2, label)


def to_physical_energy(epsilon, units: PhysicalUnits):
    """Dimensionless eigenvalue to physical energy, E = eps * 2*m*p**2/hbar**2."""
    return epsilon * (2.0 * units.mass * units.dipole_strength**2 / units.hbar**2)
