import math

import gmpy2
import numpy as np
import pytest
from gmpy2 import mpfr

from qdipole import (
    InvalidArgumentError,
    Parity,
    PhysicalUnits,
    Precision,
    WaveFunction,
    coupling_constant,
    density_grid,
    eval_wavefunction,
    laguerre_nodes,
    normalize,
    state_wavefunction,
    to_physical_energy,
)

from .oracles import coupling_quad, norm_quad


@pytest.fixture(scope="module")
def even4_wave(even4, even4_ground):
    return state_wavefunction(even4, even4_ground.spectrum, 1)


@pytest.fixture(scope="module")
def odd4_wave(odd4, odd4_ground):
    return state_wavefunction(odd4, odd4_ground.spectrum, 1)


def _rel_gap(a, b, bits=256):
    with gmpy2.context(precision=bits):
        return abs(mpfr(a) - mpfr(b)) / max(abs(mpfr(b)), mpfr(1))


class TestWaveFunction:
    def test_construction_validation(self, even4):
        with pytest.raises(InvalidArgumentError):
            WaveFunction(even4.basis, 1.0, np.ones(3, dtype=object))
        with pytest.raises(InvalidArgumentError):
            WaveFunction(even4.basis, -0.5, np.ones(even4.size, dtype=object))

    def test_properties(self, even4_wave, odd4_wave):
        assert even4_wave.parity is Parity.EVEN
        assert odd4_wave.parity is Parity.ODD
        assert even4_wave.max_degree == 4
        assert even4_wave.norm_flag

    def test_basis_mismatch_rejected(self, even6, even4_ground):
        with pytest.raises(InvalidArgumentError):
            state_wavefunction(even6, even4_ground.spectrum, 1)


class TestNorm:
    def test_even_norm_by_independent_quadrature(self, even4_wave):
        # adaptive 2D quadrature, no Gram matrix involved
        assert abs(float(norm_quad(even4_wave)) - 1.0) <= 1e-8

    def test_odd_norm_by_independent_quadrature(self, odd4_wave):
        assert abs(float(norm_quad(odd4_wave)) - 1.0) <= 1e-8

    def test_normalize_recovers_scaled_vector(self, even4, even4_wave):
        with gmpy2.context(precision=256):
            scaled = np.array([mpfr(c) * 3 for c in even4_wave.coefficients], dtype=object)
        rough = WaveFunction(even4.basis, even4_wave.alpha, scaled)
        assert not rough.norm_flag
        redone = normalize(rough, even4)
        assert redone.norm_flag
        gaps = [_rel_gap(a, b) for a, b in zip(redone.coefficients, even4_wave.coefficients)]
        assert max(gaps) <= mpfr("1e-60")

    def test_normalize_idempotent(self, even4, even4_wave):
        again = normalize(even4_wave, even4)
        gaps = [_rel_gap(a, b) for a, b in zip(again.coefficients, even4_wave.coefficients)]
        assert max(gaps) <= mpfr("1e-70")

    def test_normalize_errors(self, even4, even6, even4_wave):
        zero = WaveFunction(even4.basis, 1.0, np.zeros(even4.size, dtype=object))
        with pytest.raises(InvalidArgumentError):
            normalize(zero, even4)
        with pytest.raises(InvalidArgumentError):
            normalize(even4_wave, even6)


class TestEvaluation:
    def test_origin_even(self, even4_wave):
        # only the bare exponential survives at r = 0
        want = float(even4_wave.coefficients[0])
        got = eval_wavefunction(even4_wave, 0.0, 0.83)
        assert got == pytest.approx(want, rel=1e-14)

    def test_origin_odd(self, odd4_wave):
        assert eval_wavefunction(odd4_wave, 0.0, 0.83) == 0.0

    @pytest.mark.parametrize("r,theta", [(0.3, 0.7), (1.7, 2.2), (4.0, -1.1)])
    def test_parity_relation(self, even4_wave, odd4_wave, r, theta):
        assert eval_wavefunction(even4_wave, r, -theta) == pytest.approx(
            eval_wavefunction(even4_wave, r, theta), rel=1e-13, abs=1e-300
        )
        assert eval_wavefunction(odd4_wave, r, -theta) == pytest.approx(
            -eval_wavefunction(odd4_wave, r, theta), rel=1e-13, abs=1e-300
        )

    def test_highprec_mode_agrees_with_float(self, even4_wave):
        hi = eval_wavefunction(even4_wave, 1.3, 0.4, Precision(128))
        lo = eval_wavefunction(even4_wave, 1.3, 0.4)
        assert isinstance(hi, mpfr)
        assert float(hi) == pytest.approx(lo, rel=1e-12)

    def test_negative_r_rejected(self, even4_wave):
        with pytest.raises(InvalidArgumentError):
            eval_wavefunction(even4_wave, -0.1, 0.0)


class TestLaguerre:
    def test_weights_sum_to_one(self):
        _, ws = laguerre_nodes(9)
        with gmpy2.context(precision=256):
            assert abs(sum(ws) - 1) <= mpfr("1e-70")

    def test_moments_are_factorials(self):
        # an n-point rule integrates t**k exp(-t) exactly for k <= 2n - 1
        xs, ws = laguerre_nodes(9)
        with gmpy2.context(precision=256):
            for k in (1, 5, 11, 17):
                moment = sum(w * x**k for x, w in zip(xs, ws))
                assert abs(moment / math.factorial(k) - 1) <= mpfr("1e-65")

    def test_nodes_ascending_positive(self):
        xs, _ = laguerre_nodes(12)
        assert all(a > 0 for a in xs)
        assert all(a < b for a, b in zip(xs, xs[1:]))

    def test_matches_float64_seeds(self):
        xs, _ = laguerre_nodes(8)
        seeds, _ = np.polynomial.laguerre.laggauss(8)
        assert max(abs(float(x) - s) for x, s in zip(xs, seeds)) <= 1e-8

    def test_count_validation(self):
        with pytest.raises(InvalidArgumentError):
            laguerre_nodes(0)


class TestCoupling:
    def test_matches_adaptive_quadrature_even(self, even4_wave):
        g = coupling_constant(even4_wave)
        assert abs(float(g) - float(coupling_quad(even4_wave))) <= 1e-6

    def test_matches_adaptive_quadrature_odd(self, odd4_wave):
        g = coupling_constant(odd4_wave)
        assert abs(float(g) - float(coupling_quad(odd4_wave))) <= 1e-6

    def test_sign_flip_invariance(self, even4, even4_wave):
        with gmpy2.context(precision=256):
            flipped = np.array([-mpfr(c) for c in even4_wave.coefficients], dtype=object)
        mirror = WaveFunction(even4.basis, even4_wave.alpha, flipped, norm_flag=True)
        assert _rel_gap(coupling_constant(mirror), coupling_constant(even4_wave)) <= mpfr("1e-70")

    def test_node_doubling_is_inert(self, even4_wave):
        g = coupling_constant(even4_wave)
        K = even4_wave.max_degree
        g2 = coupling_constant(even4_wave, radial_nodes=2 * (2 * K + 3), angular_points=2 * (4 * K + 2))
        assert abs(float(g) - float(g2)) <= 1e-12

    def test_precision_stability(self, even4_wave):
        g256 = coupling_constant(even4_wave, Precision(256))
        g512 = coupling_constant(even4_wave, Precision(512))
        assert abs(float(g256) - float(g512)) <= 1e-8

    def test_requires_normalized_input(self, even4, even4_wave):
        rough = WaveFunction(even4.basis, even4_wave.alpha, even4_wave.coefficients)
        with pytest.raises(InvalidArgumentError):
            coupling_constant(rough)

    def test_rejects_undersized_rules(self, even4_wave):
        with pytest.raises(InvalidArgumentError):
            coupling_constant(even4_wave, radial_nodes=3)
        with pytest.raises(InvalidArgumentError):
            coupling_constant(even4_wave, angular_points=5)


class TestDensityGrid:
    def test_even_density_mirror_symmetric(self, even4_wave):
        grid = density_grid(even4_wave, (-6.0, 6.0, -6.0, 6.0), 41, 41)
        assert grid.values.shape == (41, 41)
        assert np.allclose(grid.values, grid.values[:, ::-1], rtol=1e-12, atol=1e-300)

    def test_odd_density_vanishes_on_axis(self, odd4_wave):
        grid = density_grid(odd4_wave, (-5.0, 5.0, -5.0, 5.0), 21, 21)
        assert grid.values[:, 10].max() <= 1e-25
        assert grid.values.max() > 1e-4

    def test_total_mass_close_to_one(self, even4_wave):
        grid = density_grid(even4_wave, (-25.0, 25.0, -25.0, 25.0), 201, 201)
        xs, ys = grid.axes()
        mass = grid.values.sum() * (xs[1] - xs[0]) * (ys[1] - ys[0])
        assert abs(mass - 1.0) <= 0.01

    def test_axes_match_extent(self, even4_wave):
        grid = density_grid(even4_wave, (-2.0, 3.0, -1.0, 1.0), 11, 5, state_index=1)
        xs, ys = grid.axes()
        assert (xs[0], xs[-1], ys[0], ys[-1]) == (-2.0, 3.0, -1.0, 1.0)
        assert (len(xs), len(ys)) == (11, 5)
        assert grid.state_label[0] == "even"
        assert grid.state_label[1] == 1

    def test_validation(self, even4_wave):
        with pytest.raises(InvalidArgumentError):
            density_grid(even4_wave, (2.0, -2.0, -1.0, 1.0), 11, 11)
        with pytest.raises(InvalidArgumentError):
            density_grid(even4_wave, (-1.0, 1.0, -1.0, 1.0), 1, 11)


class TestPhysicalUnits:
    def test_reference_point(self):
        assert to_physical_energy(1.0, PhysicalUnits(1.0, 1.0, 1.0)) == 2.0
        assert to_physical_energy(0.0, PhysicalUnits(1.0, 1.0, 1.0)) == 0.0

    def test_scaling(self):
        units = PhysicalUnits(hbar=2.0, mass=3.0, dipole_strength=5.0)
        assert to_physical_energy(-0.1, units) == pytest.approx(-0.1 * 37.5)

    def test_validation(self):
        with pytest.raises(InvalidArgumentError):
            PhysicalUnits(1.0, -1.0, 1.0)
