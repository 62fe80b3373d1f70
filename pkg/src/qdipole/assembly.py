"""Exact assembly of the Gram and operator matrices at unit exponent.

All three matrices are assembled once at alpha = 1.  Scaling to any other
exponent is a diagonal congruence applied later, so the expensive exact
work is independent of alpha.  The Gram matrix is factorized here as well,
with a fraction-free (integer Bareiss) elimination: the matrix is lifted to
integers by a common denominator, eliminated with exact integer divisions,
and the unit lower factor and positive pivots are recovered as rationals at
the end.  This avoids per-operation gcd reduction, which dominates the cost
of a naive rational Cholesky at these sizes.
"""

from __future__ import annotations

import hashlib
import os
from dataclasses import dataclass
from pathlib import Path

import gmpy2
import numpy as np
from gmpy2 import mpq, mpz

from .basis import BasisFunction, Parity, as_parity, basis_size, enumerate_basis
from .errors import (
    CacheChecksumError,
    CacheFormatError,
    CacheVersionError,
    InternalInconsistencyError,
    InvalidArgumentError,
)
from .exact_integrals import Rational, angular_integral, radial_integral

FORMAT_VERSION = 1
_MAGIC = "qdipole-exact-cache"
_ENV_CACHE_DIR = "QDIPOLE_CACHE_DIR"


def _sine_power(a: BasisFunction, b: BasisFunction) -> int:
    if a.parity is not b.parity:
        raise InvalidArgumentError(f"mixed-parity matrix element: {a.parity.value} vs {b.parity.value}")
    return 2 if a.sin_factor else 0


def overlap_entry(a: BasisFunction, b: BasisFunction) -> Rational:
    """Gram matrix element <a|b> at unit exponent, divided by pi.

    The area element contributes one power of r, hence the +1 in the
    radial power.

    Raises:
        InvalidArgumentError: if the two functions belong to different sectors.
    """
    s = _sine_power(a, b)
    return radial_integral(a.p + b.p + 1) * angular_integral(a.j + b.j, s)


def potential_entry(a: BasisFunction, b: BasisFunction) -> Rational:
    """Element of the dipole potential cos(theta)/r, divided by pi.

    The 1/r cancels the measure's r and the cosine raises the angular
    power by one, which couples basis functions of opposite cosine parity.
    """
    s = _sine_power(a, b)
    return radial_integral(a.p + b.p) * angular_integral(a.j + b.j + 1, s)


def kinetic_entry(a: BasisFunction, b: BasisFunction) -> Rational:
    """Element of the (positive) kinetic operator, divided by pi.

    Computed in the symmetric weak form, the integral of grad(a).grad(b).
    The radial part collects (p - r)(q - r) r**(p+q-1) * exp(-2r) terms and
    the angular part differentiates the cos/sin factors; in the odd sector
    the product rule on sin(theta)*cos(theta)**j yields the three-term
    cosine-power combination below.
    """
    s = _sine_power(a, b)
    P, J = a.p + b.p, a.j + b.j
    t = mpq(0)
    if a.p and b.p:
        t += a.p * b.p * radial_integral(P - 1)
    t += -(a.p + b.p) * radial_integral(P) + radial_integral(P + 1)
    t *= angular_integral(J, s)
    if s == 0:
        if a.j and b.j:
            t += a.j * b.j * radial_integral(P - 1) * angular_integral(J - 2, 2)
    else:
        ang = (1 + a.j) * (1 + b.j) * angular_integral(J + 2, 0)
        ang -= ((1 + a.j) * b.j + a.j * (1 + b.j)) * angular_integral(J, 0)
        if a.j and b.j:
            ang += a.j * b.j * angular_integral(J - 2, 0)
        t += radial_integral(P - 1) * ang
    return t


@dataclass(frozen=True, eq=False)
class ExactMatrixSet:
    """Exact matrices of one symmetry sector at unit exponent.

    S1, T1 and V1 are the Gram, kinetic and potential matrices as dense
    row-major lists of rationals (a common factor pi is divided out of
    all three).  L and D hold the factorization S1 = L * diag(D) * L^T:
    L as the strictly lower triangle in row-major ragged form (row i has
    i entries, the unit diagonal is implied) and D as the list of positive
    pivots.  Instances are treated as immutable and are identity-hashed,
    so downstream stages can key per-set caches on them.
    """

    parity: Parity
    K: int
    basis: tuple[BasisFunction, ...]
    S1: list[list[Rational]]
    T1: list[list[Rational]]
    V1: list[list[Rational]]
    L: list[list[Rational]]
    D: list[Rational]

    @property
    def size(self) -> int:
        return len(self.basis)

    def is_canonical(self) -> bool:
        """Whether the basis is the full truncation enumerated from (parity, K)."""
        return self.basis == tuple(enumerate_basis(self.parity, self.K))


def _bareiss_ldl(S: list[list[Rational]]) -> tuple[list[list[Rational]], list[Rational]]:
    """Fraction-free LDL^T of a symmetric positive definite rational matrix.

    Lifts S to integers by the lcm of all denominators, runs one-step
    Bareiss elimination on the lower triangle (every division is exact),
    and converts back at the end.  The k-th integer pivot is the k-th
    leading principal minor of the lifted matrix, so positive definiteness
    is equivalent to all pivots being positive; no pivoting is performed.

    Returns:
        (L, D) with L the strictly lower triangle in ragged row-major form
        and D the pivot list.

    Raises:
        InternalInconsistencyError: on a nonpositive pivot.
    """
    n = len(S)
    scale = mpz(1)
    for i in range(n):
        for j in range(i + 1):
            scale = gmpy2.lcm(scale, S[i][j].denominator)
    # ragged lower triangle as object arrays so the inner update runs as one
    # vectorized expression per row instead of a Python loop per element
    B = [np.array([mpz(S[i][j] * scale) for j in range(i + 1)], dtype=object) for i in range(n)]
    piv_prev = mpz(1)
    minors: list[mpz] = []
    for k in range(n):
        piv = B[k][k]
        if piv <= 0:
            raise InternalInconsistencyError(
                f"nonpositive pivot at step {k}: the Gram matrix is not positive definite"
            )
        minors.append(piv)
        colk = np.array([B[i][k] for i in range(k + 1, n)], dtype=object)
        for i in range(k + 1, n):
            bik = B[i][k]
            seg = B[i][k + 1 : i + 1]
            if bik:
                B[i][k + 1 : i + 1] = (piv * seg - bik * colk[: i - k]) // piv_prev
            else:
                B[i][k + 1 : i + 1] = (piv * seg) // piv_prev
        piv_prev = piv
    L = [[mpq(B[i][k], minors[k]) for k in range(i)] for i in range(n)]
    D = []
    prev = mpz(1)
    for k in range(n):
        D.append(mpq(minors[k], prev * scale))
        prev = minors[k]
    return L, D


def _assemble(parity: Parity, K: int, basis: list[BasisFunction]) -> ExactMatrixSet:
    n = len(basis)
    S = [[overlap_entry(a, b) for b in basis] for a in basis]
    T = [[kinetic_entry(a, b) for b in basis] for a in basis]
    V = [[potential_entry(a, b) for b in basis] for a in basis]
    L, D = _bareiss_ldl(S)
    return ExactMatrixSet(parity, K, tuple(basis), S, T, V, L, D)


def assemble(parity: Parity | str, K: int) -> ExactMatrixSet:
    """Assemble and factorize the full truncation-K basis of one sector."""
    parity = as_parity(parity)
    return _assemble(parity, K, enumerate_basis(parity, K))


def assemble_basis(functions: list[BasisFunction]) -> ExactMatrixSet:
    """Assemble an explicitly given basis, e.g. a low-degree prefix.

    All functions must share one sector and be distinct.  K is recorded as
    the maximum total degree present; the resulting set is generally not
    canonical and therefore not cacheable.
    """
    functions = list(functions)
    if not functions:
        raise InvalidArgumentError("empty basis")
    parity = functions[0].parity
    if any(f.parity is not parity for f in functions):
        raise InvalidArgumentError("all basis functions must share one parity sector")
    if len(set(functions)) != len(functions):
        raise InvalidArgumentError("duplicate basis functions")
    K = max(f.degree for f in functions)
    return _assemble(parity, max(K, 1), functions)


# ---------------------------------------------------------------------------
# cache files


def default_cache_dir() -> Path:
    env = os.environ.get(_ENV_CACHE_DIR)
    if env:
        return Path(env)
    return Path.home() / ".cache" / "qdipole"


def cache_path(parity: Parity | str, K: int, cache_dir: Path | str | None = None) -> Path:
    """File a canonical (parity, K) set is stored under for this format version."""
    base = Path(cache_dir) if cache_dir is not None else default_cache_dir()
    return base / f"{as_parity(parity).value}-K{K}-v{FORMAT_VERSION}.qdc"


def _format_rational(q: Rational) -> str:
    return f"{q.numerator}/{q.denominator}"


def _parse_rational(text: str) -> Rational:
    try:
        num, den = text.split("/")
        return mpq(mpz(num), mpz(den))
    except (ValueError, ZeroDivisionError) as exc:
        raise CacheFormatError(f"bad rational literal {text!r}") from exc


def save_cache(m: ExactMatrixSet, path: Path | str) -> Path:
    """Write an exact matrix set to a portable text cache file.

    Only canonical sets are accepted, because the file records the basis
    by (parity, K) alone.  Matrices are stored as their nonzero lower
    triangles; a sha256 checksum of the payload is appended so corruption
    is detected on load.
    """
    if not m.is_canonical():
        raise InvalidArgumentError("only canonical (parity, K) sets can be cached")
    lines = [
        f"{_MAGIC} v{FORMAT_VERSION}",
        f"parity {m.parity.value}",
        f"K {m.K}",
        f"N {m.size}",
    ]
    for name, mat in (("S1", m.S1), ("T1", m.T1), ("V1", m.V1)):
        entries = [
            (i, j, mat[i][j])
            for i in range(m.size)
            for j in range(i + 1)
            if mat[i][j]
        ]
        lines.append(f"matrix {name} {len(entries)}")
        lines.extend(f"{i} {j} {_format_rational(q)}" for i, j, q in entries)
    entries = [(i, k, m.L[i][k]) for i in range(m.size) for k in range(i) if m.L[i][k]]
    lines.append(f"matrix L {len(entries)}")
    lines.extend(f"{i} {k} {_format_rational(q)}" for i, k, q in entries)
    lines.append(f"diagonal D {m.size}")
    lines.extend(f"{k} {_format_rational(q)}" for k, q in enumerate(m.D))
    lines.append("end")
    payload = "\n".join(lines) + "\n"
    digest = hashlib.sha256(payload.encode()).hexdigest()
    path = Path(path)
    path.parent.mkdir(parents=True, exist_ok=True)
    tmp = path.with_suffix(path.suffix + ".tmp")
    tmp.write_text(payload + f"checksum sha256:{digest}\n")
    tmp.replace(path)
    return path


def load_cache(path: Path | str) -> ExactMatrixSet:
    """Read a cache file written by :func:`save_cache`.

    Raises:
        CacheFormatError: the file is not a cache file or is malformed.
        CacheVersionError: the file declares a different format version.
        CacheChecksumError: the payload does not match its checksum.
    """
    try:
        text = Path(path).read_text()
    except OSError as exc:
        raise CacheFormatError(f"cannot read cache file {path}: {exc}") from exc
    head, _, _ = text.partition("\n")
    if not head.startswith(_MAGIC + " "):
        raise CacheFormatError(f"{path} is not a {_MAGIC} file")
    if head != f"{_MAGIC} v{FORMAT_VERSION}":
        raise CacheVersionError(f"unsupported cache version {head.removeprefix(_MAGIC).strip()!r}")

    marker = "\nchecksum sha256:"
    pos = text.rfind(marker)
    if pos < 0:
        raise CacheChecksumError(f"{path} has no checksum line")
    payload = text[: pos + 1]
    recorded = text[pos + len(marker):].strip()
    digest = hashlib.sha256(payload.encode()).hexdigest()
    if recorded != digest:
        raise CacheChecksumError(f"{path} checksum mismatch: recorded {recorded}, computed {digest}")

    lines = payload.splitlines()
    try:
        parity = as_parity(lines[1].split()[1])
        K = int(lines[2].split()[1])
        n = int(lines[3].split()[1])
    except (IndexError, ValueError, InvalidArgumentError) as exc:
        raise CacheFormatError(f"{path}: malformed header") from exc
    if n != basis_size(parity, K):
        raise CacheFormatError(f"{path}: N={n} does not match parity={parity.value} K={K}")

    mats: dict[str, list[list[Rational]]] = {}
    L = [[mpq(0)] * i for i in range(n)]
    D: list[Rational] = []
    row = 4
    try:
        for name in ("S1", "T1", "V1"):
            tag, got, count = lines[row].split()
            if tag != "matrix" or got != name:
                raise CacheFormatError(f"{path}: expected matrix {name} at line {row + 1}")
            row += 1
            mat = [[mpq(0)] * n for _ in range(n)]
            for _ in range(int(count)):
                i_s, j_s, q_s = lines[row].split()
                i, j = int(i_s), int(j_s)
                if not 0 <= j <= i < n:
                    raise CacheFormatError(f"{path}: entry ({i},{j}) out of range")
                mat[i][j] = mat[j][i] = _parse_rational(q_s)
                row += 1
            mats[name] = mat
        tag, got, count = lines[row].split()
        if tag != "matrix" or got != "L":
            raise CacheFormatError(f"{path}: expected matrix L at line {row + 1}")
        row += 1
        for _ in range(int(count)):
            i_s, k_s, q_s = lines[row].split()
            i, k = int(i_s), int(k_s)
            if not 0 <= k < i < n:
                raise CacheFormatError(f"{path}: L entry ({i},{k}) out of range")
            L[i][k] = _parse_rational(q_s)
            row += 1
        tag, got, count = lines[row].split()
        if tag != "diagonal" or got != "D" or int(count) != n:
            raise CacheFormatError(f"{path}: expected diagonal D of length {n}")
        row += 1
        for k in range(n):
            k_s, q_s = lines[row].split()
            if int(k_s) != k:
                raise CacheFormatError(f"{path}: D entries out of order")
            D.append(_parse_rational(q_s))
            row += 1
        if lines[row] != "end":
            raise CacheFormatError(f"{path}: trailing garbage before checksum")
    except CacheFormatError:
        raise
    except (IndexError, ValueError) as exc:
        raise CacheFormatError(f"{path}: malformed section data") from exc
    if any(d <= 0 for d in D):
        raise CacheFormatError(f"{path}: nonpositive pivot in D")
    basis = tuple(enumerate_basis(parity, K))
    return ExactMatrixSet(parity, K, basis, mats["S1"], mats["T1"], mats["V1"], L, D)


def assemble_cached(
    parity: Parity | str,
    K: int,
    cache_dir: Path | str | None = None,
    refresh: bool = False,
) -> ExactMatrixSet:
    """Load the canonical (parity, K) set from cache, assembling it on a miss."""
    path = cache_path(parity, K, cache_dir)
    if not refresh and path.exists():
        return load_cache(path)
    m = assemble(parity, K)
    save_cache(m, path)
    return m
