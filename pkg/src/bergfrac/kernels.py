"""Slices of the weighted Bergman kernel and their area norms.

For a radial weight the reproducing kernel of ``A^2_omega`` is

    B_z(xi) = sum_k conj(z)**k xi**k / omega_k,

so a slice at a fixed anchor ``z`` is a power series in ``xi``.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from .grid import GridResolutionError, PolarGrid
from .quadrature import integrate
from .series import PowerSeries, sample_circles
from .weights import RadialWeight, moments_upto, plus_n, tail_hat

EIGHT_OVER_PI = 8.0 / math.pi
DEGREE_TOL = 1e-12


@dataclass(frozen=True, eq=False)
class KernelSlice:
    """``B_z(xi)`` (or its ``n``-th ``conj(z)`` derivative) as a series in ``xi``."""

    anchor: complex
    weight_id: str
    series: PowerSeries
    dbar_order: int = 0
    limit_form: bool = False

    @property
    def coeffs(self) -> np.ndarray:
        return self.series.coeffs

    def __call__(self, xi):
        return self.series(xi)


def _check_anchor(z):
    z = complex(z)
    if abs(z) >= 1:
        raise ValueError("kernel anchor must satisfy |z| < 1")
    return z


def _powers(z: complex, N: int, shift: int = 0) -> np.ndarray:
    """``conj(z)**(k - shift)`` for ``k = 0..N`` (zero where ``k < shift``)."""
    k = np.arange(N + 1) - shift
    out = np.zeros(N + 1, dtype=complex)
    ok = k >= 0
    zc = np.conj(z)
    if zc == 0:
        out[k == 0] = 1.0
        return out
    # exp/log keeps huge degrees stable without repeated multiplication
    with np.errstate(under="ignore"):
        out[ok] = np.exp(k[ok] * np.log(zc))
    return out


def kernel_slice(w: RadialWeight, z, N: int) -> KernelSlice:
    """Coefficients ``conj(z)**k / omega_k`` for ``k <= N``."""
    z = _check_anchor(z)
    m = moments_upto(w, N).values
    return KernelSlice(z, w.label, PowerSeries(_powers(z, N) / m))


def kernel_dbar_slice(w: RadialWeight, z, n: int, N: int) -> KernelSlice:
    """``d^n/d conj(z)^n B_z(xi)`` as a series in ``xi``.

    The coefficient of ``xi**k`` is ``k (k-1) ... (k-n+1) conj(z)**(k-n) /
    omega_k``, which equals ``(xi / conj z)**n B_z^{(n)}(xi)`` for ``z != 0``.
    At ``z = 0`` the same series is obtained by differentiating in
    ``conj(z)`` directly; the slice is then flagged ``limit_form``.
    """
    if n < 1:
        raise ValueError("derivative order must be >= 1")
    z = _check_anchor(z)
    m = moments_upto(w, N).values
    k = np.arange(N + 1)
    falling = np.ones(N + 1)
    for j in range(n):
        falling = falling * (k - j)
    coeffs = falling * _powers(z, N, shift=n) / m
    return KernelSlice(z, w.label, PowerSeries(coeffs), n, z == 0)


def kernel_derivative_slice(w: RadialWeight, z, n: int, N: int) -> PowerSeries:
    """``B_z^{(n)}(xi)``, the ``n``-th derivative in ``xi``."""
    s = kernel_slice(w, z, N).series
    for _ in range(n):
        s = s.derivative()
    return s


def kernel_degree(w: RadialWeight, radius: float, tol: float = DEGREE_TOL,
                  start: int = 64, cap: int = 1 << 17) -> int:
    """Smallest ``N`` past the peak with ``|z|**N / omega_N < tol * max``.

    Coefficient magnitudes ``|z|**k / omega_k`` first grow and then decay
    geometrically, so the search doubles ``N`` until the tail is resolved.
    """
    if not 0 <= radius < 1:
        raise ValueError("radius must lie in [0, 1)")
    if radius == 0:
        return 0
    N = start
    while N <= cap:
        m = moments_upto(w, N).values
        logc = np.arange(N + 1) * math.log(radius) - np.log(m)
        peak = int(np.argmax(logc))
        below = np.nonzero(logc[peak:] < logc[peak] + math.log(tol))[0]
        if below.size:
            return peak + int(below[0])
        N *= 2
    raise ValueError(f"kernel degree exceeds cap {cap} at |z| = {radius}")


def kernel_a1_norm(series: PowerSeries | KernelSlice, nu: RadialWeight,
                   grid: PolarGrid) -> float:
    """``int_D |s(xi)| nu(xi) dA(xi)`` by polar quadrature.

    The modulus breaks angular orthogonality, so a genuine 2-D rule is
    needed; the angle count must be at least ``4 N``.
    """
    if isinstance(series, KernelSlice):
        series = series.series
    N = series.degree
    if grid.M < 4 * N:
        raise GridResolutionError(
            f"A^1 norm of a degree-{N} series needs M >= {4 * N} angles, grid has {grid.M}")
    vals = np.abs(sample_circles(series, grid.r, grid.M)).mean(axis=1)
    return float(grid.integrate(vals, nu))


def dbar_norm_scaled(w: RadialWeight, radius: float, J: int = 240,
                     tol: float = DEGREE_TOL, nu: RadialWeight | None = None):
    """``(1 - |z|**2) * ||d/d conj(z) B_z||_{A^1_nu}`` at ``z = radius``.

    Returns ``(scaled, raw, N, M)``; ``N`` follows :func:`kernel_degree` and
    ``M`` is the next FFT-friendly size at or above ``4 N``.
    """
    from scipy.fft import next_fast_len

    nu = w if nu is None else nu
    N = max(kernel_degree(w, radius, tol), 2)
    M = next_fast_len(4 * N)
    s = kernel_dbar_slice(w, radius, 1, N)
    grid = PolarGrid.for_weight(nu, J, M)
    raw = kernel_a1_norm(s, nu, grid)
    return (1.0 - radius * radius) * raw, raw, N, M


def kernel_plusN_consistency(omega: RadialWeight, nu: RadialWeight, n_plus: int,
                             z, N: int) -> float:
    """Max relative coefficient gap between ``R B_z^{omega_{+n}}`` and ``B_z^{nu_{+n}}``.

    ``R`` multiplies coefficient ``k`` by ``omega_k / nu_k``.
    """
    z = _check_anchor(z)
    m = moments_upto(omega, N).values / moments_upto(nu, N).values
    lhs = m * kernel_slice(plus_n(omega, n_plus), z, N).coeffs
    rhs = kernel_slice(plus_n(nu, n_plus), z, N).coeffs
    scale = np.maximum(np.abs(rhs), np.finfo(float).tiny)
    nz = np.abs(rhs) > 0
    return float(np.max(np.abs(lhs - rhs)[nz] / scale[nz])) if nz.any() else 0.0


def kernel_growth_bound(omega: RadialWeight, nu: RadialWeight, radius: float,
                        n: int = 1) -> float:
    """``1 + int_0^{|z|} hat_nu(t) / (hat_omega(t) (1-t)**(n+1)) dt``.

    Comparison quantity for ``||B_z^{(n)}||_{A^1_nu}``; the ratio of the two
    stays bounded above and below for doubling weights.
    """

    def fn(t, tc):
        return tail_hat(nu, t, tc) / (tail_hat(omega, t, tc) * tc ** (n + 1))

    v, _ = integrate(fn, 0.0, float(radius), rtol=1e-10)
    return 1.0 + float(v)
