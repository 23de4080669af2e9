"""Fractional derivatives induced by pairs of radial weights.

``R^{omega,nu}`` is the coefficient multiplier ``f_k -> (omega_k / nu_k) f_k``.
It is the unique such map sending ``B_z^omega`` to ``B_z^nu``, and it can also
be written as ``R^{omega,nu} f(z) = <f, B_z^nu>_omega``.
"""

from __future__ import annotations

from dataclasses import dataclass
from functools import lru_cache

import numpy as np

from .kernels import kernel_slice
from .series import PowerSeries, inner_product_radial, multiplier_apply
from .weights import MOMENT_RTOL, RadialWeight, moments_upto


class DegreeOverflowError(ValueError):
    """Series degree exceeds the multiplier table."""


@dataclass(frozen=True, eq=False)
class FracDerivative:
    """Multiplier table ``m_k = omega_k / nu_k`` for ``k <= N``."""

    source: RadialWeight
    target: RadialWeight
    multipliers: np.ndarray
    method: str = "closed_form"

    @property
    def N(self) -> int:
        return self.multipliers.size - 1

    @property
    def label(self) -> str:
        return f"R[{self.source.label} -> {self.target.label}]"

    def __call__(self, f: PowerSeries) -> PowerSeries:
        return apply(self, f)

    def swapped(self) -> "FracDerivative":
        """``R^{nu,omega}``, built from the same moment tables."""
        return build(self.target, self.source, self.N)


@lru_cache(maxsize=256)
def _build_cached(omega, nu, N, rtol):
    a = moments_upto(omega, N, rtol)
    b = moments_upto(nu, N, rtol)
    m = a.values / b.values
    m.setflags(write=False)
    method = "closed_form" if a.method == b.method == "closed_form" else "quadrature"
    return FracDerivative(omega, nu, m, method)


def build(omega: RadialWeight, nu: RadialWeight, N: int,
          rtol: float = MOMENT_RTOL) -> FracDerivative:
    """Multiplier table of ``R^{omega,nu}`` up to degree ``N`` (cached per pair)."""
    if N < 0:
        raise ValueError("N must be >= 0")
    return _build_cached(omega, nu, int(N), rtol)


def apply(R: FracDerivative, f: PowerSeries) -> PowerSeries:
    """``sum_k m_k f_k z**k``."""
    if f.degree > R.N:
        raise DegreeOverflowError(
            f"series degree {f.degree} exceeds multiplier table degree {R.N}")
    return multiplier_apply(f, R.multipliers)


def apply_integral_form(omega: RadialWeight, nu: RadialWeight, f: PowerSeries, z) -> complex:
    """``<f, B_z^nu>_omega`` evaluated through radial inner products."""
    N = f.degree
    return inner_product_radial(f, kernel_slice(nu, z, N).series, moments_upto(omega, N))


def apply_integral_form_plus(omega: RadialWeight, nu: RadialWeight, f: PowerSeries,
                             z, n_plus: int) -> complex:
    """``<f, B_z^{nu_{+n}}>_{omega_{+n}}``, equal to ``R^{omega,nu} f(z)``."""
    from .weights import plus_n

    N = f.degree
    return inner_product_radial(f, kernel_slice(plus_n(nu, n_plus), z, N).series,
                                moments_upto(plus_n(omega, n_plus), N))


def _rel_dev(a, b):
    return float(np.max(np.abs(a - b) / np.abs(b)))


def identity_residuals(omega: RadialWeight, nu: RadialWeight, eta: RadialWeight,
                       sigma: RadialWeight, N: int) -> dict:
    """Max relative deviations of the three multiplier identities.

    * commutation: ``R^{omega,nu} R^{eta,sigma} = R^{eta,sigma} R^{omega,nu}``
    * composition: ``R^{omega,nu} R^{eta,omega} = R^{eta,nu}``
    * inversion:   ``R^{omega,nu} R^{nu,omega} = I``

    Every operator is built from its own moment ratios, so the checks
    exercise the moment tables and not just floating-point associativity.
    """
    on = build(omega, nu, N).multipliers
    es = build(eta, sigma, N).multipliers
    eo = build(eta, omega, N).multipliers
    en = build(eta, nu, N).multipliers
    no = build(nu, omega, N).multipliers
    # apply to the all-ones series in both orders
    ones = PowerSeries(np.ones(N + 1))
    left = multiplier_apply(multiplier_apply(ones, es), on).coeffs.real
    right = multiplier_apply(multiplier_apply(ones, on), es).coeffs.real
    return {
        "commutation": _rel_dev(left, right),
        "composition": _rel_dev(on * eo, en),
        "inversion": _rel_dev(on * no, np.ones(N + 1)),
    }
