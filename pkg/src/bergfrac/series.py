"""Truncated Taylor series of analytic functions on the unit disk."""

from __future__ import annotations

import warnings
from dataclasses import dataclass

import numpy as np

from .weights import MomentTable

DEFAULT_RHO_MAX = 0.999


class DiskDomainError(ValueError):
    """Evaluation point outside the open unit disk."""


class TruncationWarning(UserWarning):
    """Evaluation radius beyond the configured truncation budget."""


@dataclass(frozen=True, eq=False)
class PowerSeries:
    """Coefficients ``c_0 .. c_N`` of ``sum c_k z**k``.

    ``rho_max`` is the largest radius at which point evaluation is trusted as
    a stand-in for the untruncated function.
    """

    coeffs: np.ndarray
    rho_max: float = DEFAULT_RHO_MAX

    def __post_init__(self):
        c = np.atleast_1d(np.asarray(self.coeffs, dtype=complex)).copy()
        if c.ndim != 1 or c.size == 0:
            raise ValueError("coefficients must be a non-empty 1-D sequence")
        c.setflags(write=False)
        object.__setattr__(self, "coeffs", c)

    # construction -------------------------------------------------------

    @classmethod
    def monomial(cls, k: int, c: complex = 1.0) -> "PowerSeries":
        a = np.zeros(k + 1, dtype=complex)
        a[k] = c
        return cls(a)

    @classmethod
    def logfn(cls, N: int) -> "PowerSeries":
        """``log(1/(1-z))`` truncated at degree ``N``."""
        k = np.arange(N + 1, dtype=float)
        c = np.zeros(N + 1)
        c[1:] = 1.0 / k[1:]
        return cls(c)

    @classmethod
    def geom(cls, N: int) -> "PowerSeries":
        """``1/(1-z)`` truncated at degree ``N``."""
        return cls(np.ones(N + 1))

    @classmethod
    def random(cls, rng: np.random.Generator, degree: int) -> "PowerSeries":
        """Complex Gaussian coefficients, unit variance per component."""
        return cls(rng.standard_normal(degree + 1) + 1j * rng.standard_normal(degree + 1))

    # basic properties ----------------------------------------------------

    @property
    def degree(self) -> int:
        return self.coeffs.size - 1

    def __len__(self):
        return self.coeffs.size

    def __repr__(self):
        return f"PowerSeries(degree={self.degree}, coeffs={np.array2string(self.coeffs[:6], precision=4)}...)"

    def padded(self, N: int) -> np.ndarray:
        """Coefficients zero-padded (or cut) to length ``N + 1``."""
        out = np.zeros(N + 1, dtype=complex)
        m = min(N + 1, self.coeffs.size)
        out[:m] = self.coeffs[:m]
        return out

    def truncation_bound(self, rho: float) -> float:
        """``max|c_k| rho**(N+1) / (1 - rho)``: tail bound if |c_k| stay bounded."""
        return float(np.max(np.abs(self.coeffs)) * rho ** (self.degree + 1) / (1.0 - rho))

    # arithmetic -----------------------------------------------------------

    def __add__(self, other):
        if isinstance(other, PowerSeries):
            N = max(self.degree, other.degree)
            return PowerSeries(self.padded(N) + other.padded(N), self.rho_max)
        c = self.coeffs.copy()
        c[0] += other
        return PowerSeries(c, self.rho_max)

    __radd__ = __add__

    def __neg__(self):
        return PowerSeries(-self.coeffs, self.rho_max)

    def __sub__(self, other):
        return self + (-other)

    def __mul__(self, scalar):
        if isinstance(scalar, PowerSeries):
            return PowerSeries(np.convolve(self.coeffs, scalar.coeffs), self.rho_max)
        return PowerSeries(self.coeffs * scalar, self.rho_max)

    __rmul__ = __mul__

    def times_z(self) -> "PowerSeries":
        return PowerSeries(np.concatenate([[0.0], self.coeffs]), self.rho_max)

    def drop_constant_over_z(self) -> "PowerSeries":
        """``(f - f(0)) / z``."""
        if self.degree == 0:
            return PowerSeries([0.0], self.rho_max)
        return PowerSeries(self.coeffs[1:], self.rho_max)

    # evaluation and calculus ------------------------------------------------

    def __call__(self, z):
        return eval_series(self, z)

    def derivative(self) -> "PowerSeries":
        return derivative(self)

    def dilate(self, r: float) -> "PowerSeries":
        return dilate(self, r)

    def sample_circles(self, radii, M: int) -> np.ndarray:
        return sample_circles(self, radii, M)


def eval_series(f: PowerSeries, z):
    """Horner evaluation of the truncated sum.

    Raises for ``|z| >= 1``; warns when ``|z|`` exceeds ``f.rho_max``.
    """
    z = np.asarray(z, dtype=complex)
    az = np.abs(z)
    if np.any(az >= 1):
        raise DiskDomainError("|z| must be < 1")
    if np.any(az > f.rho_max):
        warnings.warn(
            f"|z| = {az.max():.6g} beyond rho_max = {f.rho_max}; "
            "truncation error may dominate", TruncationWarning, stacklevel=2)
    acc = np.zeros_like(z)
    for c in f.coeffs[::-1]:
        acc = acc * z + c
    return complex(acc) if acc.ndim == 0 else acc


def derivative(f: PowerSeries) -> PowerSeries:
    """Term-by-term derivative; constants map to the zero series."""
    if f.degree == 0:
        return PowerSeries([0.0], f.rho_max)
    k = np.arange(1, f.degree + 1)
    return PowerSeries(k * f.coeffs[1:], f.rho_max)


def nth_derivative(f: PowerSeries, n: int) -> PowerSeries:
    for _ in range(n):
        f = derivative(f)
    return f


def dilate(f: PowerSeries, r: float) -> PowerSeries:
    """``f_r(z) = f(r z)``."""
    if not 0 < r < 1:
        raise ValueError("dilation radius must lie in (0, 1)")
    k = np.arange(f.degree + 1)
    return PowerSeries(f.coeffs * r ** k, f.rho_max)


def multiplier_apply(f: PowerSeries, m) -> PowerSeries:
    """Coefficient multiplier ``c_k -> m_k c_k``."""
    m = np.asarray(m)
    if m.ndim != 1 or m.size < f.degree + 1:
        raise ValueError(
            f"multiplier has {m.size} entries; degree {f.degree} needs {f.degree + 1}")
    return PowerSeries(f.coeffs * m[: f.degree + 1], f.rho_max)


def inner_product_radial(f: PowerSeries, g: PowerSeries, moments: MomentTable) -> complex:
    """``<f, g>_omega = sum_k f_k conj(g_k) omega_k`` (radial orthogonality)."""
    n = min(f.degree, g.degree)
    if moments.max_index < n:
        raise ValueError(
            f"moment table reaches n = {moments.max_index}, need {n}")
    return complex(np.sum(f.coeffs[: n + 1] * np.conj(g.coeffs[: n + 1])
                          * moments.values[: n + 1]))


def sample_circles(f: PowerSeries, radii, M: int) -> np.ndarray:
    """Values ``f(rho_j exp(2 pi i m / M))`` as a ``(J, M)`` array.

    Exact for the truncated polynomial at any ``M``: coefficients are folded
    modulo ``M`` before one inverse FFT per circle.
    """
    radii = np.atleast_1d(np.asarray(radii, dtype=float))
    N = f.degree
    k = np.arange(N + 1)
    out = np.empty((radii.size, M), dtype=complex)
    block = max(1, 4_000_000 // (N + 1 + M))
    logc = np.log(np.maximum(radii, 1e-300))
    for start in range(0, radii.size, block):
        sl = slice(start, start + block)
        with np.errstate(under="ignore"):
            scaled = f.coeffs[None, :] * np.exp(np.outer(logc[sl], k))
        scaled[radii[sl] == 0, 1:] = 0.0
        if N + 1 > M:
            pad = (-(N + 1)) % M
            scaled = np.pad(scaled, ((0, 0), (0, pad))).reshape(scaled.shape[0], -1, M).sum(axis=1)
        else:
            scaled = np.pad(scaled, ((0, 0), (0, M - N - 1)))
        out[sl] = np.fft.ifft(scaled, axis=1) * M
    return out
