"""Arbitrary-precision solution of the exponent-scaled eigenproblem.

Every basis function carries the same damping exp(-alpha*r), so a matrix
element at exponent alpha is the unit-exponent element rescaled by a power
of alpha per function: with Delta = diag(alpha**-(p_a + 1)) the Gram matrix
is Delta*S1*Delta while the kinetic and potential parts pick up additional
factors alpha**2 and alpha.  Cancelling Delta turns the secular problem
into the pencil

    (alpha**2 * T1 + alpha * V1) u = eps * S1 u,

so the exact matrices never depend on alpha.  This module reduces that
pencil to standard symmetric form with the rational factorization
S1 = L*diag(D)*L^T computed during assembly, diagonalizes it with a
threshold Jacobi iteration in gmpy2 arithmetic, and reports eigenpairs
with a computed residual bound.  The reduction is cached per matrix set
and precision; only the cheap diagonal alpha-scaling is redone per alpha.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from weakref import WeakKeyDictionary

import gmpy2
import numpy as np
from gmpy2 import mpfr

from .assembly import ExactMatrixSet
from .basis import Parity
from .errors import ConvergenceError, InvalidArgumentError


@dataclass(frozen=True)
class Precision:
    """Working precision in bits of mantissa, at least 64."""

    bits: int = 256

    def __post_init__(self) -> None:
        if self.bits < 64:
            raise InvalidArgumentError(f"precision must be at least 64 bits, got {self.bits}")

    def context(self) -> gmpy2.context:
        return gmpy2.context(precision=self.bits)

    def default_tolerance(self) -> mpfr:
        """Jacobi off-diagonal tolerance, 16 bits above rounding level."""
        with self.context():
            return mpfr(2) ** (16 - self.bits)

    def doubled(self) -> "Precision":
        return Precision(2 * self.bits)


@dataclass(frozen=True, eq=False)
class Spectrum:
    """All eigenpairs of one sector at a fixed exponent.

    Attributes:
        parity, K: sector and truncation of the underlying matrix set.
        alpha: exponent the pencil was scaled to.
        precision: working precision of the solve.
        eigenvalues: ascending tuple of mpfr values.
        coefficients: object array whose column n is the pencil eigenvector
            u of state n, normalized to u.S1.u = 1.  Physical expansion
            coefficients follow as c_a = alpha**(p_a + 1) * u_a.
        residual_bound: max over states of
            ||(alpha^2 T1 + alpha V1) u - eps S1 u|| / ||S1 u||.
    """

    parity: Parity
    K: int
    alpha: float
    precision: Precision
    eigenvalues: tuple
    coefficients: np.ndarray
    residual_bound: mpfr

    @property
    def n_states(self) -> int:
        return len(self.eigenvalues)

    def state(self, n: int) -> tuple:
        """(eigenvalue, eigenvector column) of state n, 1-based from the bottom."""
        if not 1 <= n <= self.n_states:
            raise InvalidArgumentError(f"state index {n} outside 1..{self.n_states}")
        return self.eigenvalues[n - 1], self.coefficients[:, n - 1]


@dataclass(eq=False)
class _Reduced:
    """Per-(matrix set, bits) artifacts shared by all alpha values."""

    bits: int
    Lf: np.ndarray        # unit lower triangular factor of S1, mpfr
    dinv: np.ndarray      # 1/sqrt(D), mpfr
    S1f: np.ndarray       # mpfr copies of the exact matrices, for residuals
    T1f: np.ndarray
    V1f: np.ndarray
    Tt: np.ndarray        # congruence-reduced kinetic part, symmetric
    Vt: np.ndarray        # congruence-reduced potential part, symmetric


_reduced_cache: "WeakKeyDictionary[ExactMatrixSet, dict[int, _Reduced]]" = WeakKeyDictionary()


def _to_mpfr_matrix(rows) -> np.ndarray:
    return np.array([[mpfr(x) for x in row] for row in rows], dtype=object)


def _forward_congruence(Mf: np.ndarray, Lf: np.ndarray, dinv: np.ndarray) -> np.ndarray:
    """diag(dinv) L^-1 Mf L^-T diag(dinv) via two forward substitutions."""
    n = Mf.shape[0]
    Y = np.empty((n, n), dtype=object)
    for i in range(n):
        acc = Mf[i].copy()
        if i:
            acc = acc - Lf[i, :i] @ Y[:i, :]
        Y[i] = acc
    Z = np.empty((n, n), dtype=object)
    Yt = Y.T.copy()
    for i in range(n):
        acc = Yt[i].copy()
        if i:
            acc = acc - Lf[i, :i] @ Z[:i, :]
        Z[i] = acc
    out = (dinv[:, None] * Z) * dinv[None, :]
    return (out + out.T) / mpfr(2)


def _reduced(m: ExactMatrixSet, bits: int) -> _Reduced:
    per_set = _reduced_cache.setdefault(m, {})
    red = per_set.get(bits)
    if red is not None:
        return red
    n = m.size
    with gmpy2.context(precision=bits):
        Lf = np.zeros((n, n), dtype=object)
        for i in range(n):
            Lf[i, i] = mpfr(1)
            for k in range(i):
                Lf[i, k] = mpfr(m.L[i][k])
        dinv = np.array([1 / gmpy2.sqrt(mpfr(d)) for d in m.D], dtype=object)
        S1f = _to_mpfr_matrix(m.S1)
        T1f = _to_mpfr_matrix(m.T1)
        V1f = _to_mpfr_matrix(m.V1)
        Tt = _forward_congruence(T1f, Lf, dinv)
        Vt = _forward_congruence(V1f, Lf, dinv)
    red = _Reduced(bits, Lf, dinv, S1f, T1f, V1f, Tt, Vt)
    per_set[bits] = red
    return red


def reduce(m: ExactMatrixSet, alpha, prec: Precision = Precision()) -> np.ndarray:
    """Standard-form symmetric matrix of the pencil at the given exponent.

    With S1 = L*diag(D)*L^T and W = diag(D)**-1/2 * L^-1, this is
    W (alpha^2 T1 + alpha V1) W^T; its ordinary eigenvalues are the pencil
    eigenvalues.  The factor matrices are cached per (set, precision), so
    repeated calls at new alpha cost only the diagonal combination.

    Raises:
        InvalidArgumentError: if alpha <= 0.
    """
    if not alpha > 0:
        raise InvalidArgumentError(f"alpha must be positive, got {alpha}")
    red = _reduced(m, prec.bits)
    with prec.context():
        a = mpfr(alpha)
        return (a * a) * red.Tt + a * red.Vt


def float_pencil(m: ExactMatrixSet, prec: Precision = Precision()) -> tuple[np.ndarray, np.ndarray]:
    """float64 downcast (Tt, Vt) of the reduced pencil, for coarse scans.

    The reduced matrices have moderate norms (the Gram part is the
    identity), so the downcast loses only rounding-level accuracy and is
    safe for locating minima of smooth eigenvalue curves.
    """
    red = _reduced(m, prec.bits)
    return red.Tt.astype(float), red.Vt.astype(float)


def _mgs(V: np.ndarray) -> np.ndarray:
    """Modified Gram-Schmidt orthonormalization of the columns, in mpfr."""
    Q = V.copy()
    for j in range(Q.shape[1]):
        v = Q[:, j].copy()
        if j:
            cj = Q[:, :j].T @ v
            v = v - Q[:, :j] @ cj
        Q[:, j] = v / gmpy2.sqrt(v @ v)
    return Q


def jacobi_eigen(
    M: np.ndarray,
    prec: Precision = Precision(),
    tol=None,
    max_sweeps: int = 100,
    vectors: bool = True,
    precondition: bool = True,
) -> tuple[np.ndarray, np.ndarray | None]:
    """Cyclic threshold Jacobi diagonalization of a symmetric mpfr matrix.

    A float64 eigendecomposition, re-orthonormalized at full precision,
    preconditions the matrix so the high-precision sweeps start from a
    nearly diagonal congruent copy; convergence then takes a handful of
    sweeps independent of size.  Rotations below tol*||diag||/(2n) are
    skipped; the iteration stops once the off-diagonal Frobenius norm
    drops below tol*||diag||.

    Args:
        M: symmetric object array of mpfr values.  Not modified.
        prec: working precision.
        tol: relative off-diagonal target; defaults to 2**(16 - bits).
        max_sweeps: sweep budget before giving up.
        vectors: also accumulate eigenvectors.
        precondition: disable only for tests and tiny systems.

    Returns:
        (eigenvalues ascending, eigenvector columns or None).

    Raises:
        ConvergenceError: if the target is not met within max_sweeps.
    """
    n = M.shape[0]
    with prec.context():
        if tol is None:
            tol = prec.default_tolerance()
        else:
            tol = mpfr(tol)
        A = M.copy()
        if precondition and n > 1:
            w0, V0 = np.linalg.eigh(A.astype(float))
            Q = _mgs(_to_mpfr_matrix(V0))
            A = Q.T @ A @ Q
            A = (A + A.T) / mpfr(2)
            V = Q
        else:
            V = np.array([[mpfr(1 if i == j else 0) for j in range(n)] for i in range(n)], dtype=object)
        zero, one, two = mpfr(0), mpfr(1), mpfr(2)
        off = zero
        for _ in range(max_sweeps):
            dn = gmpy2.sqrt(sum((A[i, i] * A[i, i] for i in range(n)), zero))
            off2 = zero
            for i in range(n):
                r = A[i, i + 1 :]
                off2 += r @ r
            off = gmpy2.sqrt(two * off2)
            if off <= tol * dn or off == 0:
                break
            thresh = tol * dn / (2 * n)
            for p in range(n - 1):
                for q in range(p + 1, n):
                    apq = A[p, q]
                    if abs(apq) <= thresh:
                        continue
                    app = A[p, p]
                    aqq = A[q, q]
                    tau = (aqq - app) / (two * apq)
                    t = (one if tau >= 0 else -one) / (abs(tau) + gmpy2.sqrt(one + tau * tau))
                    c = one / gmpy2.sqrt(one + t * t)
                    s = t * c
                    rowp = c * A[p] - s * A[q]
                    rowq = s * A[p] + c * A[q]
                    A[p] = rowp
                    A[q] = rowq
                    A[:, p] = rowp
                    A[:, q] = rowq
                    # exact rotation values for the 2x2 block
                    A[p, p] = app - t * apq
                    A[q, q] = aqq + t * apq
                    A[p, q] = A[q, p] = zero
                    if vectors:
                        vp = c * V[:, p] - s * V[:, q]
                        vq = s * V[:, p] + c * V[:, q]
                        V[:, p] = vp
                        V[:, q] = vq
        else:
            raise ConvergenceError(
                f"Jacobi iteration missed tolerance after {max_sweeps} sweeps",
                residual=float(off),
            )
        w = np.array([A[i, i] for i in range(n)], dtype=object)
        order = np.argsort(w.astype(float), kind="stable")
        return w[order], (V[:, order] if vectors else None)


def _back_transform(red: _Reduced, Y: np.ndarray) -> np.ndarray:
    """Map standard-form eigenvectors y to pencil vectors u = L^-T D^-1/2 y."""
    n = Y.shape[0]
    Z = red.dinv[:, None] * Y
    U = np.empty_like(Z)
    for i in reversed(range(n)):
        acc = Z[i]
        if i < n - 1:
            acc = acc - red.Lf[i + 1 :, i] @ U[i + 1 :, :]
        U[i] = acc
    return U


def spectrum(m: ExactMatrixSet, alpha, prec: Precision = Precision()) -> Spectrum:
    """Solve one sector at a fixed exponent and certify the result.

    Runs the cached reduction, the Jacobi diagonalization, the back
    transformation to pencil vectors, and a residual evaluation against
    the exact matrices (converted to mpfr at working precision).

    Returns:
        A :class:`Spectrum` with all eigenpairs in ascending order.
    """
    M = reduce(m, alpha, prec)
    red = _reduced(m, prec.bits)
    with prec.context():
        w, Y = jacobi_eigen(M, prec)
        U = _back_transform(red, Y)
        a = mpfr(alpha)
        SU = red.S1f @ U
        R = (a * a) * (red.T1f @ U) + a * (red.V1f @ U) - SU * w[None, :]
        worst = mpfr(0)
        for k in range(m.size):
            num = gmpy2.sqrt(R[:, k] @ R[:, k])
            den = gmpy2.sqrt(SU[:, k] @ SU[:, k])
            ratio = num / den
            if ratio > worst:
                worst = ratio
    return Spectrum(m.parity, m.K, float(alpha), prec, tuple(w), U, worst)


def verified_spectrum(
    m: ExactMatrixSet,
    alpha,
    prec: Precision = Precision(),
) -> tuple[Spectrum, list[float]]:
    """Spectrum plus per-state agreement digits against a doubled-precision solve.

    The n-th entry of the digit list is -log10 of the relative difference
    between the eigenvalue at working precision and at twice the bits;
    math.inf marks exact agreement.
    """
    base = spectrum(m, alpha, prec)
    high = spectrum(m, alpha, prec.doubled())
    digits: list[float] = []
    with prec.doubled().context():
        for wb, wh in zip(base.eigenvalues, high.eigenvalues):
            diff = abs(wb - wh)
            if diff == 0:
                digits.append(math.inf)
            elif wh == 0:
                digits.append(0.0)
            else:
                digits.append(float(-gmpy2.log10(diff / abs(wh))))
    return base, digits


def quadratic_forms(m: ExactMatrixSet, u: np.ndarray, prec: Precision = Precision()) -> tuple:
    """(u.T1.u, u.V1.u, u.S1.u) against the exact matrices, in mpfr.

    Used for stationarity diagnostics of optimized exponents: at a
    variational minimum 2*alpha*(u.T1.u) + (u.V1.u) vanishes.
    """
    red = _reduced(m, prec.bits)
    with prec.context():
        return u @ red.T1f @ u, u @ red.V1f @ u, u @ red.S1f @ u
