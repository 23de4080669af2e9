import math

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from bergfrac.series import (
    DiskDomainError,
    PowerSeries,
    TruncationWarning,
    derivative,
    dilate,
    eval_series,
    inner_product_radial,
    multiplier_apply,
    nth_derivative,
    sample_circles,
)
from bergfrac.weights import Logarithmic, Standard, library, moments_upto

complex_coeffs = st.lists(
    st.complex_numbers(max_magnitude=10, allow_nan=False, allow_infinity=False),
    min_size=1, max_size=24)
radius = st.floats(0.01, 0.99)


class TestEvaluation:
    def test_identity(self):
        assert eval_series(PowerSeries([0, 1]), 0.3 + 0.4j) == 0.3 + 0.4j

    def test_geometric(self):
        N = 40
        assert abs(PowerSeries.geom(N)(0.5) - 2) <= 0.5 ** (N + 1) / 0.5

    def test_log(self):
        assert abs(PowerSeries.logfn(64)(0.5) - math.log(2)) < 1e-20 + 0.5**64

    def test_vectorised(self):
        z = np.array([0.1, 0.2j, -0.5])
        np.testing.assert_allclose(PowerSeries([1, 2, 3])(z), 1 + 2 * z + 3 * z**2)

    def test_outside_disk(self):
        with pytest.raises(DiskDomainError):
            PowerSeries([1, 1])(1.0)

    def test_truncation_warning(self):
        with pytest.warns(TruncationWarning):
            PowerSeries([1, 1])(0.9995)

    def test_coefficients_are_read_only(self):
        f = PowerSeries([1, 2])
        with pytest.raises(ValueError):
            f.coeffs[0] = 5


class TestDerivative:
    def test_square(self):
        np.testing.assert_array_equal(derivative(PowerSeries([0, 0, 1])).coeffs, [0, 2])

    def test_constant(self):
        np.testing.assert_array_equal(derivative(PowerSeries([3])).coeffs, [0])

    def test_log_derivative_is_geometric(self):
        np.testing.assert_allclose(derivative(PowerSeries.logfn(30)).coeffs, np.ones(30))

    def test_nth(self):
        f = PowerSeries([1, 1, 1, 1, 1])
        np.testing.assert_array_equal(nth_derivative(f, 3).coeffs, [6, 24])
        np.testing.assert_array_equal(nth_derivative(f, 0).coeffs, f.coeffs)


class TestDilation:
    def test_linear(self):
        np.testing.assert_array_equal(dilate(PowerSeries([0, 1]), 0.5).coeffs, [0, 0.5])

    @given(complex_coeffs, radius, radius)
    def test_composition(self, c, r1, r2):
        f = PowerSeries(c)
        np.testing.assert_allclose(dilate(dilate(f, r1), r2).coeffs,
                                   dilate(f, r1 * r2).coeffs, rtol=1e-13, atol=1e-300)

    @given(complex_coeffs, radius)
    def test_chain_rule(self, c, r):
        f = PowerSeries(c)
        np.testing.assert_allclose(derivative(dilate(f, r)).coeffs,
                                   r * dilate(derivative(f), r).coeffs if f.degree else [0],
                                   rtol=1e-13, atol=1e-300)

    @given(complex_coeffs, radius)
    def test_commutes_with_multipliers(self, c, r):
        f = PowerSeries(c)
        m = np.arange(1, f.degree + 2) ** 1.5
        # equal up to the order of two floating multiplications
        np.testing.assert_allclose(multiplier_apply(dilate(f, r), m).coeffs,
                                   dilate(multiplier_apply(f, m), r).coeffs,
                                   rtol=4e-16, atol=1e-300)

    @pytest.mark.parametrize("r", [0.0, 1.0])
    def test_invalid_radius(self, r):
        with pytest.raises(ValueError):
            dilate(PowerSeries([1]), r)


class TestMultiplier:
    def test_identity(self):
        f = PowerSeries([1, 2j, 3])
        np.testing.assert_array_equal(multiplier_apply(f, np.ones(3)).coeffs, f.coeffs)

    def test_zf_derivative_symbol(self):
        # (z f)' has symbol k + 1
        out = multiplier_apply(PowerSeries.monomial(2), np.arange(1, 4))
        np.testing.assert_array_equal(out.coeffs, [0, 0, 3])

    @given(complex_coeffs)
    def test_inverse_multiplier_restores(self, c):
        f = PowerSeries(c)
        m = 2.0 ** np.arange(f.degree + 1)
        np.testing.assert_array_equal(multiplier_apply(multiplier_apply(f, m), 1 / m).coeffs,
                                      f.coeffs)

    def test_too_short(self):
        with pytest.raises(ValueError):
            multiplier_apply(PowerSeries([1, 2, 3]), [1, 1])


class TestInnerProduct:
    def test_monomials(self):
        t = moments_upto(Standard(0), 10)
        for m in range(6):
            for n in range(6):
                v = inner_product_radial(PowerSeries.monomial(m), PowerSeries.monomial(n), t)
                assert v == (t[n] if m == n else 0)

    def test_z_with_z(self):
        t = moments_upto(Standard(0), 2)
        assert inner_product_radial(PowerSeries([0, 1]), PowerSeries([0, 1]), t) == 0.5

    @given(complex_coeffs)
    @settings(max_examples=30)
    def test_parseval(self, c):
        f = PowerSeries(c)
        t = moments_upto(Logarithmic(2), f.degree)
        v = inner_product_radial(f, f, t)
        assert v.real >= 0 and abs(v.imag) <= 1e-15 * v.real
        assert abs(v - np.sum(np.abs(f.coeffs) ** 2 * t.values)) <= 1e-12 * (1 + abs(v))

    def test_table_too_short(self):
        with pytest.raises(ValueError):
            inner_product_radial(PowerSeries.geom(5), PowerSeries.geom(5),
                                 moments_upto(Standard(0), 3))

    @pytest.mark.parametrize("name", ["std1.5", "zero", "log2"])
    def test_against_polar_grid(self, name, rng):
        from bergfrac.grid import PolarGrid

        w = library()[name]
        f, g = PowerSeries.random(rng, 32), PowerSeries.random(rng, 32)
        grid = PolarGrid.for_weight(w, 300, 80)
        values = sample_circles(f, grid.r, grid.M) * np.conj(sample_circles(g, grid.r, grid.M))
        ref = grid.integrate(values, w)
        v = inner_product_radial(f, g, moments_upto(w, 32))
        assert abs(v - ref) <= 1e-6 * abs(v)


class TestSampling:
    @pytest.mark.parametrize("M", [7, 16, 64])
    def test_matches_pointwise_evaluation(self, M, rng):
        f = PowerSeries.random(rng, 40)
        radii = np.array([0.0, 0.3, 0.9])
        theta = 2 * np.pi * np.arange(M) / M
        direct = f(radii[:, None] * np.exp(1j * theta)[None, :])
        np.testing.assert_allclose(sample_circles(f, radii, M), direct, atol=1e-11)


class TestArithmetic:
    def test_sum_pads(self):
        np.testing.assert_array_equal((PowerSeries([1]) + PowerSeries([0, 2])).coeffs, [1, 2])

    def test_product_is_convolution(self):
        np.testing.assert_array_equal((PowerSeries([1, 1]) * PowerSeries([1, -1])).coeffs,
                                      [1, 0, -1])

    def test_shift_helpers(self):
        f = PowerSeries([3, 1, 2])
        np.testing.assert_array_equal(f.times_z().coeffs, [0, 3, 1, 2])
        np.testing.assert_array_equal(f.drop_constant_over_z().coeffs, [1, 2])
