"""End-to-end checks of every headline result the package must reproduce.

Each test registers an `acceptance` property; the terminal summary prints
one PASS/FAIL line per criterion.  Reference energies are hard numbers the
solver must hit, not values produced by the code under test.
"""

import os

import gmpy2
import mpmath as mp
import numpy as np
import pytest
from gmpy2 import mpfr, mpq

from qdipole import (
    BasisFunction,
    FdConfig,
    Parity,
    assemble,
    assemble_basis,
    assemble_cached,
    cli,
    coupling_constant,
    eval_wavefunction,
    fd_spectrum,
    k_sweep,
    optimize_alpha_auto,
    spectrum,
    state_wavefunction,
    verified_spectrum,
)

from .oracles import eigen_2x2, symbolic_entries, to_sympy

# five lowest variational energies per sector at truncation order K = 20
EVEN_ENERGIES_K20 = (-0.1377416, -0.0411524, -0.0199679, -0.0118525, -0.0097472)
ODD_ENERGIES_K20 = (-0.0232932, -0.0125862, -0.0079918, -0.0055643, -0.0053312)
# even ground state at higher truncation orders
EVEN_GROUND_K30 = -0.13774677227
EVEN_GROUND_K40 = -0.13774778205


@pytest.fixture(scope="session")
def acc_cache(tmp_path_factory):
    return tmp_path_factory.mktemp("acceptance-cache")


def _optimize_table(parity: str, acc_cache, tmp_path_factory) -> list[list[str]]:
    out = tmp_path_factory.mktemp(f"acc-{parity}") / "table.csv"
    code = cli.run(
        [
            "optimize", "--parity", parity, "--K", "20", "--states", "5",
            "--cache-dir", str(acc_cache), "--output", str(out),
        ]
    )
    assert code == 0
    rows = [ln.split(",") for ln in out.read_text().splitlines()]
    assert rows[0] == ["state", "alpha_star", "epsilon", "stationarity", "evaluations"]
    return rows[1:]


@pytest.fixture(scope="session")
def even20_rows(acc_cache, tmp_path_factory):
    return _optimize_table("even", acc_cache, tmp_path_factory)


@pytest.fixture(scope="session")
def odd20_rows(acc_cache, tmp_path_factory):
    return _optimize_table("odd", acc_cache, tmp_path_factory)


@pytest.fixture(scope="session")
def m20(acc_cache):
    return assemble_cached("even", 20, acc_cache)


@pytest.fixture(scope="session")
def even20_verified(m20, even20_rows):
    """256-bit ground spectrum at the optimal exponent, re-run at 512 bits."""
    alpha = float(even20_rows[0][1])
    spec, digits = verified_spectrum(m20, alpha)
    return alpha, spec, digits


def test_even_sector_reference_energies(record_property, even20_rows):
    record_property("acceptance", "1 even K=20 states 1-5 within 2e-7 of reference")
    assert len(even20_rows) == 5
    for row, target in zip(even20_rows, EVEN_ENERGIES_K20):
        assert abs(float(row[2]) - target) <= 2e-7, f"state {row[0]}"


def test_odd_sector_reference_energies(record_property, odd20_rows):
    record_property("acceptance", "2 odd K=20 states 1-5 within 2e-7 of reference")
    assert len(odd20_rows) == 5
    for row, target in zip(odd20_rows, ODD_ENERGIES_K20):
        assert abs(float(row[2]) - target) <= 2e-7, f"state {row[0]}"


def test_k30_ground_state(record_property, acc_cache):
    record_property("acceptance", "3 K=30 ground state within 1e-8 of reference")
    m = assemble_cached("even", 30, acc_cache)
    res = optimize_alpha_auto(m, 1)
    assert abs(float(res.epsilon) - EVEN_GROUND_K30) <= 1e-8


def test_k40_ground_state_stretch(record_property, acc_cache):
    record_property("acceptance", "3s K=40 stretch ground state (QDIPOLE_STRETCH=1 to enable)")
    if not os.environ.get("QDIPOLE_STRETCH"):
        pytest.skip("long run, set QDIPOLE_STRETCH=1 to enable")
    m = assemble_cached("even", 40, acc_cache)
    res = optimize_alpha_auto(m, 1)
    assert abs(float(res.epsilon) - EVEN_GROUND_K40) <= 1e-8


def test_coupling_constant_k20(record_property, m20, even20_verified):
    record_property("acceptance", "4 quartic coupling at K=20 optimum = 0.0193 +/- 0.0003")
    _, spec, _ = even20_verified
    w = state_wavefunction(m20, spec, 1)
    g = coupling_constant(w)
    assert abs(float(g) - 0.0193) <= 0.0003


def test_coupling_constant_three_term_basis(record_property):
    record_property("acceptance", "4b quartic coupling in the 3-term basis = 0.017 +/- 0.001")
    trio = [
        BasisFunction(Parity.EVEN, 0, 0, False),
        BasisFunction(Parity.EVEN, 1, 0, False),
        BasisFunction(Parity.EVEN, 1, 1, False),
    ]
    m = assemble_basis(trio)
    res = optimize_alpha_auto(m, 1)
    w = state_wavefunction(m, res.spectrum, 1)
    g = coupling_constant(w)
    assert abs(float(g) - 0.017) <= 0.001


def test_convergence_sweep(record_property, acc_cache, even20_rows):
    rows = k_sweep("even", 1, list(range(2, 21)), cache_dir=acc_cache)
    eps = [float(e) for _, _, e in rows]
    reached = next(K for (K, _, _), e in zip(rows, eps) if abs(e - eps[-1]) <= 1e-4)
    record_property(
        "acceptance",
        f"5 ground energy nonincreasing over K=2..20 (within 1e-4 of final from K={reached})",
    )
    for a, b in zip(eps, eps[1:]):
        assert b <= a + 1e-10
    # the exponent valley is flat at K=20: independently seeded searches can
    # settle in stationary points ~1e-8 apart in energy
    assert abs(eps[-1] - float(even20_rows[0][2])) <= 1e-7


def test_grid_oracle_agreement(record_property, even20_rows):
    record_property("acceptance", "6 grid-discretization ground state within 2% of variational")
    vals = fd_spectrum(FdConfig(40.0, 400, 6))
    ritz = float(even20_rows[0][2])
    assert abs(vals[0] - ritz) <= 0.02 * abs(ritz)


def test_factorization_reconstructs_exactly(record_property):
    record_property("acceptance", "7a exact rational Gram refactorization at K=10")
    m = assemble("even", 10)
    for i in range(m.size):
        for j in range(i + 1):
            total = mpq(0)
            for k in range(j + 1):
                a = m.L[i][k] if k < i else mpq(1)
                b = m.L[j][k] if k < j else mpq(1)
                total += a * m.D[k] * b
            assert total == m.S1[i][j]


def test_eigenvector_gram_orthonormality(record_property, m20, even20_verified):
    record_property("acceptance", "7b overlap-orthonormality of K=20 eigenvectors <= 1e-15")
    _, spec, _ = even20_verified
    n = m20.size
    with gmpy2.context(precision=256):
        S1f = np.array([[mpfr(x) for x in row] for row in m20.S1], dtype=object)
        G = spec.coefficients.T @ S1f @ spec.coefficients
        off = max(abs(G[i][j] - (1 if i == j else 0)) for i in range(n) for j in range(n))
    assert off <= 1e-15


def test_generalized_residual(record_property, even20_verified):
    record_property("acceptance", "7c generalized eigenresidual <= 1e-20 at 256 bits, K=20")
    _, spec, _ = even20_verified
    assert float(spec.residual_bound) <= 1e-20


def test_stationarity_of_all_tabulated_states(record_property, even20_rows, odd20_rows):
    record_property("acceptance", "7d stationarity <= 1e-6 at every tabulated optimum")
    for row in even20_rows + odd20_rows:
        assert float(row[3]) <= 1e-6


def test_scaling_law_against_quadrature(record_property, even4):
    record_property("acceptance", "7e exponent scaling of matrix entries vs numeric quadrature")
    alpha = mp.mpf(9) / 10
    pairs = [(0, 0), (0, 5), (2, 7), (4, 10)]
    exact = lambda q: mp.mpf(int(q.numerator)) / mp.mpf(int(q.denominator))
    with mp.workdps(30):

        def member(f):
            val = lambda r, t: r**f.p * mp.cos(t) ** f.j * mp.e ** (-alpha * r)
            dr = lambda r, t: (
                (f.p * r ** (f.p - 1) if f.p else mp.mpf(0)) - alpha * r**f.p
            ) * mp.cos(t) ** f.j * mp.e ** (-alpha * r)
            dt = lambda r, t: (
                -f.j * r**f.p * mp.cos(t) ** (f.j - 1) * mp.sin(t) if f.j else mp.mpf(0)
            ) * mp.e ** (-alpha * r)
            return val, dr, dt

        def plane(fn):
            ring = lambda r: mp.quad(lambda t: fn(r, t), [0, mp.pi, 2 * mp.pi])
            return mp.quad(ring, [0, 1 / alpha, 10 / alpha, mp.inf]) / mp.pi

        for ia, ib in pairs:
            fa, fb = even4.basis[ia], even4.basis[ib]
            P = fa.p + fb.p
            va, dra, dta = member(fa)
            vb, drb, dtb = member(fb)
            s_q = plane(lambda r, t: va(r, t) * vb(r, t) * r)
            v_q = plane(lambda r, t: va(r, t) * vb(r, t) * mp.cos(t))
            t_q = plane(lambda r, t: (dra(r, t) * drb(r, t) + dta(r, t) * dtb(r, t) / r**2) * r)
            assert abs(s_q - exact(even4.S1[ia][ib]) * alpha ** -(P + 2)) <= mp.mpf("1e-20")
            assert abs(v_q - exact(even4.V1[ia][ib]) * alpha ** -(P + 1)) <= mp.mpf("1e-20")
            assert abs(t_q - exact(even4.T1[ia][ib]) * alpha**-P) <= mp.mpf("1e-18")


def test_precision_ladder(record_property, even20_verified):
    record_property("acceptance", "7f doubled-precision rerun agrees to >= 9 digits at K=20")
    _, _, digits = even20_verified
    assert min(digits) >= 9


def test_parity_symmetry_of_states(record_property, m20, even20_verified, acc_cache, odd20_rows):
    record_property("acceptance", "7g wavefunction parity symmetry under theta -> -theta")
    _, spec, _ = even20_verified
    w_even = state_wavefunction(m20, spec, 1)
    modd = assemble_cached("odd", 20, acc_cache)
    w_odd = state_wavefunction(modd, spectrum(modd, float(odd20_rows[0][1])), 1)
    for r, t in [(0.4, 0.9), (2.0, 2.6), (6.5, -1.2)]:
        ve = eval_wavefunction(w_even, r, t)
        assert eval_wavefunction(w_even, r, -t) == pytest.approx(ve, rel=1e-12, abs=1e-300)
        vo = eval_wavefunction(w_odd, r, t)
        assert eval_wavefunction(w_odd, r, -t) == pytest.approx(-vo, rel=1e-12, abs=1e-300)


def test_coupling_quadrature_stability(record_property, m20, even20_verified):
    record_property("acceptance", "7h coupling stable to 1e-12 under quadrature doubling")
    _, spec, _ = even20_verified
    w = state_wavefunction(m20, spec, 1)
    g1 = coupling_constant(w)
    g2 = coupling_constant(w, radial_nodes=2 * 43, angular_points=2 * 82)
    assert abs(float(g1) - float(g2)) <= 1e-12


def test_smallest_system_brute_force(record_property, acc_cache, tmp_path_factory):
    record_property("acceptance", "8 K=1 eigenvalues match exact quadratic roots")
    out = tmp_path_factory.mktemp("acc-c8") / "solve.csv"
    code = cli.run(
        [
            "solve", "--parity", "even", "--K", "1", "--alpha", "1.25", "--digits", "70",
            "--cache-dir", str(acc_cache), "--output", str(out),
        ]
    )
    assert code == 0
    rows = [ln.split(",") for ln in out.read_text().splitlines()][1:]
    assert len(rows) == 2

    m1 = assemble("even", 1)
    alpha = to_sympy(mpq(5, 4))
    S, H = [[None] * 2 for _ in range(2)], [[None] * 2 for _ in range(2)]
    for i in range(2):
        for j in range(2):
            s_ij, t_ij, v_ij = symbolic_entries(m1.basis[i], m1.basis[j], alpha)
            S[i][j] = mpq(int(s_ij.p), int(s_ij.q))
            h_ij = t_ij + v_ij
            H[i][j] = mpq(int(h_ij.p), int(h_ij.q))
    with mp.workdps(90):
        exact = eigen_2x2(S, H)
        for row, want in zip(rows, exact):
            assert abs(mp.mpf(row[1]) - want) <= mp.mpf("1e-60")
