import numpy as np
import pytest
from scipy.fft import next_fast_len

from bergfrac.grid import GridResolutionError, PolarGrid
from bergfrac.kernels import (
    EIGHT_OVER_PI,
    dbar_norm_scaled,
    kernel_a1_norm,
    kernel_dbar_slice,
    kernel_degree,
    kernel_derivative_slice,
    kernel_growth_bound,
    kernel_plusN_consistency,
    kernel_slice,
)
from bergfrac.operators import build
from bergfrac.series import PowerSeries, inner_product_radial
from bergfrac.weights import Standard, library, moments_upto, total_mass

DHAT_NAMES = ["std0", "std1", "std1.5", "std-0.5", "shift1", "shift2.5", "zero", "log2"]


def random_anchors(rng, n, rmax=0.9):
    return rmax * np.sqrt(rng.uniform(size=n)) * np.exp(2j * np.pi * rng.uniform(size=n))


class TestKernelSlice:
    def test_standard0_closed_form(self):
        z = 0.3 - 0.5j
        s = kernel_slice(Standard(0), z, 200)
        k = np.arange(201)
        np.testing.assert_allclose(s.coeffs, (k + 1) * np.conj(z) ** k, rtol=1e-12)
        xi = np.array([0.2, -0.4j, 0.5 + 0.1j])
        np.testing.assert_allclose(s(xi), 1 / (1 - np.conj(z) * xi) ** 2, rtol=1e-13)

    def test_origin_is_constant(self):
        w = library()["log2"]
        s = kernel_slice(w, 0, 10)
        assert s.coeffs[0] == 1 / total_mass(w)
        assert np.all(s.coeffs[1:] == 0)

    @pytest.mark.parametrize("name", DHAT_NAMES)
    def test_reproducing(self, name, rng):
        w = library()[name]
        t = moments_upto(w, 32)
        p = PowerSeries.random(rng, 32)
        for z in random_anchors(rng, 10):
            v = inner_product_radial(p, kernel_slice(w, z, 32).series, t)
            assert abs(v - p(z)) <= 1e-10 * max(1.0, abs(p(z)))

    def test_cubic_reproduced(self):
        w = Standard(1.5)
        z = 0.4 + 0.3j
        v = inner_product_radial(PowerSeries.monomial(3), kernel_slice(w, z, 5).series,
                                 moments_upto(w, 5))
        assert abs(v - z**3) < 1e-15

    def test_hermitian(self, rng):
        w = library()["zero"]
        for z, u in zip(random_anchors(rng, 5), random_anchors(rng, 5)):
            a = kernel_slice(w, z, 300)(u)
            b = kernel_slice(w, u, 300)(z)
            assert abs(a - np.conj(b)) <= 1e-12 * abs(a)

    def test_anchor_outside(self):
        with pytest.raises(ValueError):
            kernel_slice(Standard(0), 1.0, 5)


class TestDbarSlice:
    def test_standard0_first_order(self):
        z = 0.6 + 0.2j
        s = kernel_dbar_slice(Standard(0), z, 1, 300)
        k = np.arange(301)
        ref = np.zeros(301, complex)
        ref[1:] = k[1:] * (k[1:] + 1) * np.conj(z) ** (k[1:] - 1)
        np.testing.assert_allclose(s.coeffs, ref, rtol=1e-12)
        xi = 0.3 - 0.2j
        assert abs(s(xi) - 2 * xi / (1 - np.conj(z) * xi) ** 3) < 1e-11

    @pytest.mark.parametrize("n", [1, 2, 3])
    def test_xi_over_zbar_form(self, n):
        w = library()["log2"]
        z, N = 0.5 - 0.4j, 120
        lhs = kernel_dbar_slice(w, z, n, N)
        d = kernel_derivative_slice(w, z, n, N)
        xi = np.array([0.3, 0.1 + 0.6j])
        rhs = (xi / np.conj(z)) ** n * d(xi)
        np.testing.assert_allclose(lhs(xi), rhs, rtol=1e-12)

    def test_central_difference_in_zbar(self):
        w = library()["std1.5"]
        z, xi, N = 0.4, 0.3 + 0.2j, 150
        errs = []
        for h in (1e-3, 1e-4):
            # z real, so z + h shifts conj(z) by h
            fd = (kernel_slice(w, z + h, N)(xi) - kernel_slice(w, z - h, N)(xi)) / (2 * h)
            errs.append(abs(fd - kernel_dbar_slice(w, z, 1, N)(xi)))
        assert errs[0] < 1e-4
        # second-order convergence
        assert errs[1] < errs[0] / 50

    def test_origin_limit_form(self):
        w = Standard(1)
        s = kernel_dbar_slice(w, 0, 1, 6)
        assert s.limit_form
        ref = np.zeros(7)
        ref[1] = 1 / moments_upto(w, 1)[1]
        np.testing.assert_allclose(s.coeffs, ref, rtol=1e-15)

    def test_order_zero_rejected(self):
        with pytest.raises(ValueError):
            kernel_dbar_slice(Standard(0), 0.5, 0, 5)


class TestDegreeAndNorms:
    def test_degree_grows_with_radius(self):
        w = Standard(0)
        Ns = [kernel_degree(w, 1 - 2.0**-j) for j in range(1, 8)]
        assert Ns == sorted(Ns) and Ns[0] < Ns[-1]

    def test_degree_resolves_tail(self):
        w, rad = Standard(0), 0.9
        N = kernel_degree(w, rad)
        k = np.arange(N + 1)
        c = rad**k * (k + 1)
        assert c[-1] < 1e-12 * c.max()

    def test_constant_norm_is_mass(self):
        w = library()["std1.5"]
        g = PolarGrid.for_weight(w, 100, 8)
        assert abs(kernel_a1_norm(PowerSeries([2 - 1j]), w, g) - abs(2 - 1j) * total_mass(w)) < 1e-13

    def test_refuses_coarse_angles(self):
        with pytest.raises(GridResolutionError):
            kernel_a1_norm(PowerSeries.geom(10), Standard(0), PolarGrid.build(20, 39))

    def test_scaled_norm_increases_toward_eight_over_pi(self):
        vals = [dbar_norm_scaled(Standard(0), 1 - 2.0**-j, J=120)[0] for j in range(1, 7)]
        assert np.all(np.diff(vals) > 0)
        assert vals[-1] < EIGHT_OVER_PI

    @pytest.mark.parametrize("name", ["std0", "std1.5", "shift1", "zero"])
    def test_growth_ratio_bounded(self, name):
        w = library()[name]
        ratios, dbar_ratio = [], []
        for rad in (0.5, 0.75, 0.9, 0.95, 0.98, 0.99):
            N = max(kernel_degree(w, rad), 2)
            g = PolarGrid.for_weight(w, 150, next_fast_len(4 * N))
            d = kernel_a1_norm(kernel_derivative_slice(w, rad, 1, N), w, g)
            ratios.append(d / kernel_growth_bound(w, w, rad))
            dbar_ratio.append(kernel_a1_norm(kernel_dbar_slice(w, rad, 1, N), w, g) / d)
        assert 0.3 < min(ratios) and max(ratios) < 10
        assert ratios[-1] / ratios[-2] < 1.1
        # the two derivatives become comparable, ratio tending to 1
        assert abs(dbar_ratio[-1] - 1) < 0.05
        assert abs(dbar_ratio[-1] - 1) < abs(dbar_ratio[2] - 1)


class TestPlusConsistency:
    def test_zero_plus_is_exact(self):
        assert kernel_plusN_consistency(Standard(0), Standard(1), 0, 0.5 + 0.2j, 50) < 1e-14

    def test_standard_one_plus(self):
        assert kernel_plusN_consistency(Standard(0), Standard(1), 1, 0.7j, 60) <= 1e-10

    def test_multiplier_equality(self):
        from bergfrac.weights import plus_n

        om, nu = library()["log2"], library()["std1.5"]
        a = build(om, nu, 200).multipliers
        b = build(plus_n(om, 1), plus_n(nu, 1), 200).multipliers
        np.testing.assert_allclose(b, a, rtol=1e-8)
