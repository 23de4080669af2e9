"""Weighted Bergman projection of sampled disk functions and explicit pre-images.

``P_omega g`` has Taylor coefficients ``<g, xi**k>_omega / omega_k``.  For
products ``u(|xi|) h(xi)`` angular orthogonality collapses this to
``h_k (u omega)_k / omega_k``, which is what the factored path computes.
"""

from __future__ import annotations

from dataclasses import dataclass
from typing import Callable

import numpy as np

from .grid import GridResolutionError, PolarGrid
from .operators import apply, build
from .quadrature import QuadratureError
from .series import PowerSeries, sample_circles
from .weights import (
    RadialWeight,
    alpha_shift,
    eval_weight,
    moments_upto,
    profile_moments,
    tail_hat,
)


class PreimageGateError(ValueError):
    """Weight rejected by the class gate of a pre-image construction."""


# --------------------------------------------------------------------------
# radial profiles
# --------------------------------------------------------------------------


class RadialProfile:
    """A radial factor ``u(r)``; subclasses supply values and weighted moments."""

    label = "profile"

    def __call__(self, r, rc=None):
        r = np.asarray(r, dtype=float)
        rc = 1.0 - r if rc is None else np.asarray(rc, dtype=float)
        return self._value(r, rc)

    def _value(self, r, rc):
        raise NotImplementedError

    def weighted_moments(self, omega: RadialWeight, N: int) -> np.ndarray:
        """``(u omega)_k = 2 int_0^1 r**(2k+1) u(r) omega(r) dr`` for ``k <= N``."""
        if hasattr(omega, "_tail_inverse"):
            return self._moments_by_mass(omega, N)
        vals, _ = profile_moments(lambda r, rc: self._value(r, rc) * omega._value(r, rc),
                                  N, omega.breakpoints)
        return vals

    def _moments_by_mass(self, omega, N, rtol=1e-12):
        # log-type tails: radial grids in the tail-mass coordinate, doubled
        # until two levels agree
        k = np.arange(N + 1)
        prev = None
        for J in (100, 200, 400, 800, 1600):
            grid = PolarGrid.for_weight(omega, J, 1)
            wts = grid.radial_weights(omega) * self._value(grid.r, grid.rc)
            with np.errstate(under="ignore"):
                cur = np.exp(np.outer(2 * k, np.log(grid.r))) @ wts
            if prev is not None and np.all(np.abs(cur - prev) <= rtol * np.abs(cur)):
                return cur
            prev = cur
        raise QuadratureError(f"profile moments against {omega.label} did not converge",
                              cur, np.abs(cur - prev))


@dataclass(frozen=True)
class PowerProfile(RadialProfile):
    """``u(r) = (1 - r)**alpha``; moments are those of ``omega_alpha``."""

    alpha: float

    @property
    def label(self):
        return f"(1-r)^{self.alpha:g}"

    def _value(self, r, rc):
        return rc ** self.alpha

    def weighted_moments(self, omega, N):
        return moments_upto(alpha_shift(omega, self.alpha), N).values


@dataclass(frozen=True)
class RegularProfile(RadialProfile):
    """``u(r) = hat(r) / (r omega(r))``, so ``u omega = hat(r) / r``."""

    omega: RadialWeight

    @property
    def label(self):
        return f"hat/(r w) [{self.omega.label}]"

    def _value(self, r, rc):
        with np.errstate(divide="ignore", invalid="ignore"):
            return self.omega._tail(r, rc) / (r * self.omega._value(r, rc))

    def weighted_moments(self, omega, N):
        if omega != self.omega:
            return super().weighted_moments(omega, N)
        vals, _ = profile_moments(lambda r, rc: omega._tail(r, rc) / r, N,
                                  omega.breakpoints)
        return vals


@dataclass(frozen=True)
class FunctionProfile(RadialProfile):
    """Arbitrary ``u(r, 1 - r)``."""

    fn: Callable
    label: str = "custom"

    def _value(self, r, rc):
        return self.fn(r, rc)


# --------------------------------------------------------------------------
# sampled functions
# --------------------------------------------------------------------------


@dataclass(frozen=True, eq=False)
class DiskSample:
    """Values of a function on a polar grid.

    When built from ``offset + u(|xi|) h(xi)`` the factors are kept so that
    projection can bypass the grid.
    """

    grid: PolarGrid | None
    values: np.ndarray | None
    profile: RadialProfile | None = None
    analytic: PowerSeries | None = None
    offset: complex = 0.0

    @property
    def factored(self) -> bool:
        return self.profile is not None

    @classmethod
    def from_factored(cls, profile: RadialProfile, analytic: PowerSeries,
                      grid: PolarGrid | None = None, offset: complex = 0.0) -> "DiskSample":
        values = None
        if grid is not None:
            values = _factored_values(profile, analytic, offset, grid)
        return cls(grid, values, profile, analytic, complex(offset))

    @classmethod
    def from_function(cls, fn: Callable, grid: PolarGrid) -> "DiskSample":
        """Samples ``fn(z)`` at the grid nodes (``fn`` is vectorised in ``z``)."""
        return cls(grid, np.asarray(fn(grid.points()), dtype=complex))

    @classmethod
    def from_series(cls, f: PowerSeries, grid: PolarGrid) -> "DiskSample":
        return cls(grid, sample_circles(f, grid.r, grid.M))

    def resample(self, grid: PolarGrid) -> "DiskSample":
        if not self.factored:
            raise ValueError("only factored samples can be resampled")
        return DiskSample.from_factored(self.profile, self.analytic, grid, self.offset)

    def factored_residual(self) -> float:
        """Max relative gap between stored values and the factored form."""
        if not self.factored or self.values is None:
            return 0.0
        ref = _factored_values(self.profile, self.analytic, self.offset, self.grid)
        return float(np.max(np.abs(self.values - ref)) / max(np.max(np.abs(ref)), 1e-300))

    def sup(self) -> float:
        if self.values is None:
            raise ValueError("sample has no grid values")
        return float(np.max(np.abs(self.values)))


def _factored_values(profile, analytic, offset, grid):
    u = profile(grid.r, grid.rc)
    return offset + u[:, None] * sample_circles(analytic, grid.r, grid.M)


# --------------------------------------------------------------------------
# projection
# --------------------------------------------------------------------------


def project(omega: RadialWeight, g: DiskSample, N: int) -> PowerSeries:
    """Coefficients ``<g, xi**k>_omega / omega_k`` for ``k <= N`` by grid quadrature."""
    grid = g.grid
    if grid is None or g.values is None:
        raise ValueError("project needs grid values; use project_factored otherwise")
    if N > grid.max_degree:
        raise GridResolutionError(
            f"grid with M = {grid.M} angles resolves degree {grid.max_degree}, asked for {N}")
    fourier = np.fft.fft(g.values, axis=1)[:, : N + 1] / grid.M
    k = np.arange(N + 1)
    with np.errstate(under="ignore"):
        rk = np.exp(np.outer(np.log(grid.r), k))
    num = (grid.radial_weights(omega)[:, None] * rk * fourier).sum(axis=0)
    return PowerSeries(num / moments_upto(omega, N).values)


def project_factored(omega: RadialWeight, profile: RadialProfile, h: PowerSeries,
                     N: int | None = None, offset: complex = 0.0) -> PowerSeries:
    """Projection of ``offset + u(|xi|) h(xi)`` using one-dimensional moments only."""
    N = h.degree if N is None else N
    c = h.padded(N) * profile.weighted_moments(omega, N) / moments_upto(omega, N).values
    c[0] += offset
    return PowerSeries(c)


def project_sample(omega: RadialWeight, g: DiskSample, N: int | None = None) -> PowerSeries:
    """Factored fast path when available, grid quadrature otherwise."""
    if g.factored:
        return project_factored(omega, g.profile, g.analytic, N, g.offset)
    return project(omega, g, N)


# --------------------------------------------------------------------------
# pre-images
# --------------------------------------------------------------------------


def _gate(omega, force, want):
    from .analysis import classify_cached

    if force:
        return
    rep = classify_cached(omega)
    ok = rep.in_D if want == "D" else (rep.regular.verdict and omega.positive)
    if not ok:
        raise PreimageGateError(
            f"{omega.label} failed the {'doubling' if want == 'D' else 'regularity'} "
            "check; force=True (--force) overrides")


def bloch_analytic_part(omega: RadialWeight, h: PowerSeries, alpha: float) -> PowerSeries:
    """``R^{omega, omega_alpha} h``."""
    return apply(build(omega, alpha_shift(omega, alpha), h.degree), h)


def preimage_bloch(omega: RadialWeight, h: PowerSeries, alpha: float,
                   grid: PolarGrid | None = None, force: bool = False) -> DiskSample:
    """``g_alpha(z) = (1 - |z|)**alpha R^{omega, omega_alpha} h(z)``.

    ``P_omega g_alpha = h`` for doubling ``omega``.  The doubling check is
    numerical, so ``force`` skips it.
    """
    if not alpha > 0:
        raise ValueError("alpha must be positive")
    _gate(omega, force, "D")
    return DiskSample.from_factored(PowerProfile(float(alpha)),
                                    bloch_analytic_part(omega, h, alpha), grid)


def regular_analytic_part(f: PowerSeries) -> PowerSeries:
    """``2 z f'(z) + f(z) - f(0)``, i.e. coefficients ``(2k+1) f_k`` for ``k >= 1``."""
    k = np.arange(f.degree + 1)
    c = (2 * k + 1) * f.coeffs
    c[0] = 0.0
    return PowerSeries(c)


def preimage_regular(omega: RadialWeight, f: PowerSeries, grid: PolarGrid | None = None,
                     force: bool = False) -> DiskSample:
    """``f(0) + hat(|z|) / (|z| omega(|z|)) (2 z f' + f - f(0))``.

    Needs a strictly positive regular weight: for doubling weights with
    zeros the radial factor blows up on the zero set.
    """
    if not omega.positive and not force:
        raise PreimageGateError(
            f"{omega.label} vanishes on part of the disk; the radial factor "
            "hat/(r omega) is unbounded there")
    _gate(omega, force, "R")
    return DiskSample.from_factored(RegularProfile(omega), regular_analytic_part(f),
                                    grid, offset=f.coeffs[0])


def little_bloch_decay(omega: RadialWeight, h: PowerSeries, alpha: float,
                       radii=None, M: int | None = None):
    """``(r, max_theta |g_alpha(r e^{i theta})|)`` along radii tending to 1."""
    if radii is None:
        radii = 1.0 - np.logspace(0, -4, 41)
    radii = np.asarray(radii, dtype=float)
    A = bloch_analytic_part(omega, h, alpha)
    M = M or max(64, 16 * (A.degree + 1))
    peak = np.abs(sample_circles(A, radii, M)).max(axis=1)
    return radii, (1.0 - radii) ** alpha * peak


def regular_profile_values(omega: RadialWeight, r):
    """``hat(r) / (r omega(r))`` at plain radii."""
    r = np.asarray(r, dtype=float)
    return tail_hat(omega, r) / (r * eval_weight(omega, r))
