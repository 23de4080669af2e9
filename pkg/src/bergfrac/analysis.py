"""Weight classification, norm estimators and Littlewood-Paley checks.

Everything here is numerical evidence, not proof: class verdicts say the
estimated constants look stable up to a cut-off radius, and norm reports
always carry the change observed under refinement.
"""

from __future__ import annotations

import math
import warnings
from dataclasses import asdict, dataclass, field
from functools import lru_cache

import numpy as np
from scipy.optimize import minimize

from .grid import PolarGrid
from .operators import build
from .projection import DiskSample, bloch_analytic_part
from .quadrature import integrate
from .series import (
    PowerSeries,
    TruncationWarning,
    inner_product_radial,
    nth_derivative,
    sample_circles,
)
from .weights import (
    RadialWeight,
    alpha_shift,
    kernel_integral,
    log_tail_hat,
    log_weight,
    moments_upto,
    plus_n,
    r2_multiply,
    star_transform,
    tail_hat,
    eval_weight,
)

STABILITY_RTOL = 0.05
GROWTH_FACTOR = 1.10
R_MAX_FINE = 1.0 - 1e-4
R_MAX_COARSE = 1.0 - 1e-3
_LOG_OVERFLOW = 700.0


# --------------------------------------------------------------------------
# classification
# --------------------------------------------------------------------------


@dataclass(frozen=True)
class ConstantEstimate:
    """A doubling constant estimated up to two cut-off radii."""

    verdict: bool
    value: float
    value_coarse: float
    stable: bool


@dataclass(frozen=True)
class RegularityEstimate:
    verdict: bool
    q_min: float
    q_max: float
    stable: bool


@dataclass(frozen=True)
class ClassReport:
    """Estimated class membership of a radial weight.

    ``dhat.value`` estimates ``sup hat(r) / hat((1+r)/2)`` and ``dcheck.value``
    estimates ``inf hat(r) / hat(1 - (1-r)/K)``.  ``a`` and ``b`` are the
    smallest and largest local slopes of ``log hat`` against ``log(1-r)``
    near the boundary.
    """

    weight_id: str
    K: float
    r_max: float
    dhat: ConstantEstimate
    dcheck: ConstantEstimate
    regular: RegularityEstimate
    a: float
    b: float
    reduced_confidence: bool = False

    @property
    def in_D(self) -> bool:
        return self.dhat.verdict and self.dcheck.verdict

    def to_dict(self) -> dict:
        d = asdict(self)
        d["in_D"] = self.in_D
        return d


def _default_radii(r_max):
    inner = np.linspace(0.0, 0.99, 500)
    outer = 1.0 - np.logspace(-2, math.log10(1.0 - r_max), 600)
    r = np.unique(np.concatenate([inner, outer]))
    return r


def _rel_change(new, old):
    if new == old:
        return 0.0
    if not (math.isfinite(new) and math.isfinite(old)) or old == 0:
        return math.inf
    return abs(new / old - 1.0)


def classify(w: RadialWeight, K: float = 2.0, radii=None,
             r_coarse: float = R_MAX_COARSE) -> ClassReport:
    """Estimate doubling constants, regularity and tail exponents of ``w``.

    Verdicts require the constants found on ``r <= r_coarse`` and on the full
    grid (which must reach ``0.9999``) to agree within 5%.
    """
    if not K > 1:
        raise ValueError("K must exceed 1")
    r = _default_radii(R_MAX_FINE) if radii is None else np.sort(np.asarray(radii, float))
    r_max = float(r[-1])
    if r_max < 0.9999:
        raise ValueError("classification grid must reach r >= 0.9999")
    rc = 1.0 - r
    lt = log_tail_hat(w, r, rc)
    lt_half = log_tail_hat(w, 1.0 - rc / 2.0, rc / 2.0)
    lt_K = log_tail_hat(w, 1.0 - rc / K, rc / K)
    with np.errstate(divide="ignore"):
        lw = log_weight(w, r, rc)
    reduced = bool(np.any(~np.isfinite(lt)) or np.any(~np.isfinite(lt_half)))

    coarse = r <= r_coarse + 1e-15

    def exp_clip(x):
        return math.inf if x > _LOG_OVERFLOW else math.exp(x)

    # upper doubling
    lr = lt - lt_half
    c_fine, c_coarse = exp_clip(np.max(lr)), exp_clip(np.max(lr[coarse]))
    stable = _rel_change(c_fine, c_coarse) < STABILITY_RTOL
    dhat = ConstantEstimate(bool(stable and math.isfinite(c_fine)), c_fine, c_coarse, stable)

    # lower doubling: margin above 1 must persist
    lr = lt - lt_K
    p_fine, p_coarse = exp_clip(np.min(lr)), exp_clip(np.min(lr[coarse]))
    stable = _rel_change(p_fine - 1.0, p_coarse - 1.0) < STABILITY_RTOL
    dcheck = ConstantEstimate(bool(stable and p_fine > 1.0), p_fine, p_coarse, stable)

    # regularity: hat / ((1-r) omega) bounded above and below
    with np.errstate(invalid="ignore"):
        lq = lt - np.log(rc) - lw
    q = np.exp(np.clip(lq, -_LOG_OVERFLOW, _LOG_OVERFLOW))
    q[np.isposinf(lq)] = math.inf
    qmin, qmax = float(np.min(q)), float(np.max(q))
    stable = (_rel_change(qmin, float(np.min(q[coarse]))) < STABILITY_RTOL
              and _rel_change(qmax, float(np.max(q[coarse]))) < STABILITY_RTOL)
    positive = bool(np.all(np.isfinite(lq)))
    in_D = dhat.verdict and dcheck.verdict
    regular = RegularityEstimate(bool(stable and positive and in_D), qmin, qmax, stable)

    # local exponents of the tail near the boundary
    near = (r >= 0.9) & np.isfinite(lt)
    if np.count_nonzero(near) > 2:
        slope = np.diff(lt[near]) / np.diff(np.log(rc[near]))
        a, b = float(np.min(slope)), float(np.max(slope))
    else:
        a = b = math.nan
    return ClassReport(w.label, float(K), r_max, dhat, dcheck, regular, a, b, reduced)


@lru_cache(maxsize=128)
def classify_cached(w: RadialWeight, K: float = 2.0) -> ClassReport:
    return classify(w, K)


# --------------------------------------------------------------------------
# norms
# --------------------------------------------------------------------------


@dataclass(frozen=True)
class NormReport:
    """A norm estimate with the change seen under refinement."""

    function_id: str
    kind: str
    value: float
    grid: dict
    delta: float
    diverged: bool = False
    history: tuple = field(default_factory=tuple)

    def to_dict(self) -> dict:
        return asdict(self)


def _series_id(f: PowerSeries) -> str:
    return f"series(deg={f.degree})"


def _bloch_grid_max(fp: PowerSeries, J: int, M: int):
    r = np.unique(np.concatenate([np.linspace(0.0, 0.95, J // 2),
                                  1.0 - np.logspace(math.log10(0.05), -6, J - J // 2)]))
    vals = (1.0 - r * r)[:, None] * np.abs(sample_circles(fp, r, M))
    j, m = np.unravel_index(np.argmax(vals), vals.shape)
    return float(vals[j, m]), float(r[j]), 2.0 * math.pi * m / M


def bloch_seminorm(f: PowerSeries, J: int = 400, M: int | None = None) -> NormReport:
    """``sup (1 - |z|**2) |f'(z)| + |f(0)|``.

    A grid scan over radii clustered at the boundary is polished by a
    bounded local maximisation in ``(r, theta)``; ``delta`` is the gain of
    the polishing step over the raw grid maximum.
    """
    fp = f.derivative()
    M = M or max(64, 16 * (fp.degree + 1))
    grid_max, r0, t0 = _bloch_grid_max(fp, J, M)

    def neg(x):
        r = min(max(x[0], 0.0), 1.0 - 1e-12)
        return -(1.0 - r * r) * abs(fp(r * np.exp(1j * x[1])))

    # the truncated polynomial itself is normed, so evaluating past rho_max is fine
    with warnings.catch_warnings():
        warnings.simplefilter("ignore", TruncationWarning)
        res = minimize(neg, [r0, t0], method="L-BFGS-B",
                       bounds=[(0.0, 1.0 - 1e-12), (t0 - math.pi, t0 + math.pi)])
    best = max(grid_max, -float(res.fun))
    f0 = abs(f.coeffs[0])
    return NormReport(_series_id(f), "bloch", best + f0, {"J": J, "M": M},
                      best - grid_max)


def _besov_seminorm_p(fd, p, Nd, J, M):
    grid = PolarGrid.build(J, M)
    vals = np.abs(sample_circles(fd, grid.r, M)) ** p
    # (1-r)**(Nd p) / (1 - r**2)**2 written with rc to keep precision near 1
    radial = grid.rc ** (Nd * p - 2) / (1.0 + grid.r) ** 2
    return float(grid.integrate(vals.mean(axis=1) * radial))


def besov_norm(f: PowerSeries, p: float, Nd: int = 2, J: int = 200,
               M: int | None = None) -> NormReport:
    """``(int |f^(Nd)|**p (1-|z|)**(Nd p) dlambda)**(1/p) + sum_{j<Nd} |f^(j)(0)|``.

    ``dlambda = dA / (1 - |z|**2)**2``; needs ``Nd >= 2`` and ``Nd p > 1``.
    """
    if Nd < 2:
        raise ValueError("derivative order Nd must be >= 2")
    if not p >= 1 or not Nd * p > 1:
        raise ValueError("need p >= 1 and Nd * p > 1")
    fd = nth_derivative(f, Nd)
    M = M or max(64, 8 * (fd.degree + 1))
    s1 = _besov_seminorm_p(fd, p, Nd, J, M)
    s2 = _besov_seminorm_p(fd, p, Nd, 2 * J, 2 * M)
    head = sum(math.factorial(j) * abs(c) for j, c in enumerate(f.coeffs[:Nd]))
    value = s2 ** (1.0 / p) + head
    return NormReport(_series_id(f), f"besov(p={p:g},Nd={Nd})", value,
                      {"J": 2 * J, "M": 2 * M}, abs(s2 ** (1 / p) - s1 ** (1 / p)))


def refinement_verdict(values, grow: float = GROWTH_FACTOR, rtol: float = STABILITY_RTOL):
    """``(diverged, stable)`` for a sequence of successive refinements.

    Divergent: the last three steps each grow by more than ``grow``.  Stable:
    the last three relative changes are all below ``rtol``.
    """
    v = np.asarray(values, dtype=float)
    if v.size < 4:
        raise ValueError("need at least four refinement levels")
    last = v[-4:]
    with np.errstate(divide="ignore", invalid="ignore"):
        ratio = last[1:] / last[:-1]
    diverged = bool(np.all(~np.isfinite(last[1:])) or np.all(ratio > grow))
    stable = bool(np.all(np.abs(ratio - 1.0) < rtol))
    return diverged, stable


def lp_lambda_omega_norm(g, omega: RadialWeight, p: float, J: int = 200,
                         M: int | None = None, levels=(4, 6, 8, 10)) -> NormReport:
    """``||g||`` in ``L^p`` of ``dlambda_omega = omega dA / (hat(|z|) (1 - |z|))``.

    ``g`` is a factored :class:`DiskSample` (resampled on each grid) or a
    vectorised callable of ``z``.  The radial range is cut at
    ``r_max = 1 - 10**-k`` for ``k`` in ``levels``; the report flags
    divergence per :func:`refinement_verdict` and ``value`` is the last level.
    """
    if not p >= 1:
        raise ValueError("p must be >= 1")
    if isinstance(g, DiskSample):
        if not g.factored:
            raise ValueError("refinement needs a factored sample or a callable")
        deg = g.analytic.degree
        sample = g.resample
    else:
        deg = 64
        sample = lambda grid: DiskSample.from_function(g, grid)  # noqa: E731
    M = M or max(64, 8 * (deg + 1))
    history = []
    for k in levels:
        grid = PolarGrid.for_weight(omega, J, M, r_max=1.0 - 10.0 ** -k)
        vals = np.abs(sample(grid).values) ** p
        ratio = np.exp(log_weight(omega, grid.r, grid.rc) - log_tail_hat(omega, grid.r, grid.rc))
        radial = 2.0 * grid.r * grid.w * ratio / grid.rc
        history.append(float(np.sum(radial * vals.mean(axis=1))) ** (1.0 / p))
    diverged, stable = refinement_verdict(history)
    value = math.inf if diverged else history[-1]
    delta = _rel_change(history[-1], history[-2])
    return NormReport(getattr(g, "label", "sample"), f"L^p_lambda_omega(p={p:g})", value,
                      {"J": J, "M": M, "levels": list(levels)}, delta, diverged,
                      tuple(history))


def bloch_preimage_sup_ratio(omega: RadialWeight, h: PowerSeries, alpha: float,
                             J: int, M: int | None = None) -> float:
    """``sup_grid |g_alpha| / ||h||_B`` for the Bloch-type pre-image of ``h``."""
    A = bloch_analytic_part(omega, h, alpha)
    M = M or max(64, 16 * (A.degree + 1))
    grid = PolarGrid.for_weight(omega, J, M)
    peak = (grid.rc ** alpha * np.abs(sample_circles(A, grid.r, M)).max(axis=1)).max()
    return float(peak / bloch_seminorm(h).value)


# --------------------------------------------------------------------------
# Littlewood-Paley identities
# --------------------------------------------------------------------------


def lp_identity_residual(f: PowerSeries, g: PowerSeries, omega: RadialWeight) -> float:
    """``|<f,g>_omega - 4 <f',g'>_{omega*} - omega(D) f(0) conj(g(0))|``.

    Every term is a radial inner product: ``<f',g'>_{omega*}`` pairs the
    coefficients ``k f_k`` and ``k g_k`` against ``omega*_{k-1}``.
    """
    N = max(f.degree, g.degree)
    a, b = PowerSeries(f.padded(N)), PowerSeries(g.padded(N))
    lhs = inner_product_radial(a, b, moments_upto(omega, N))
    if N == 0:
        grad = 0.0
    else:
        grad = inner_product_radial(a.derivative(), b.derivative(),
                                    moments_upto(star_transform(omega), N - 1))
    mass = moments_upto(omega, 0).values[0] * a.coeffs[0] * np.conj(b.coeffs[0])
    return float(abs(lhs - 4.0 * grad - mass))


def lp_identity_scale(f: PowerSeries, g: PowerSeries, omega: RadialWeight) -> float:
    """``|<f,g>_omega| + 1``, the scale of the absolute LP residual contract."""
    N = min(f.degree, g.degree)
    return abs(inner_product_radial(f, g, moments_upto(omega, N))) + 1.0


def frac_lp_residual(f: PowerSeries, g: PowerSeries, omega: RadialWeight,
                     eta: RadialWeight, nu: RadialWeight, N: int, M: int) -> float:
    """Relative gap in ``<f,g>_omega = <R^{eta,eta_{+N}} f, R^{nu,nu_{+M}} g>_{omega_{+N+M}}``.

    Normalised by ``sum |f_k| |g_k| omega_k``; all moments of the transformed
    weights are computed from their own definitions.
    """
    deg = max(f.degree, g.degree)
    a, b = PowerSeries(f.padded(deg)), PowerSeries(g.padded(deg))
    lhs = inner_product_radial(a, b, moments_upto(omega, deg))
    Rf = build(eta, plus_n(eta, N), deg)(a)
    Rg = build(nu, plus_n(nu, M), deg)(b)
    rhs = inner_product_radial(Rf, Rg, moments_upto(plus_n(omega, N + M), deg))
    scale = float(np.sum(np.abs(a.coeffs) * np.abs(b.coeffs) * moments_upto(omega, deg).values))
    return float(abs(lhs - rhs) / scale) if scale else float(abs(lhs - rhs))


def shifted_lp_residual(f: PowerSeries, g: PowerSeries, omega: RadialWeight) -> float:
    """Relative gap in ``<f0, g0>_{r^2 omega} = 4 <f', g'>_{omega*}``, ``f0 = (f - f(0))/z``."""
    deg = max(f.degree, g.degree, 1)
    a, b = PowerSeries(f.padded(deg)), PowerSeries(g.padded(deg))
    f0, g0 = a.drop_constant_over_z(), b.drop_constant_over_z()
    n = deg - 1
    lhs = inner_product_radial(f0, g0, moments_upto(r2_multiply(omega), n))
    rhs = 4.0 * inner_product_radial(a.derivative(), b.derivative(),
                                     moments_upto(star_transform(omega), n))
    scale = float(np.sum(np.abs(f0.coeffs) * np.abs(g0.coeffs)
                         * moments_upto(r2_multiply(omega), n).values))
    return float(abs(lhs - rhs) / scale) if scale else float(abs(lhs - rhs))


def moment_lp_residual(omega: RadialWeight, N: int) -> float:
    """Max relative gap in ``omega_n = 4 n**2 omega*_{n-1}`` for ``1 <= n <= N``."""
    m = moments_upto(omega, N).values
    s = moments_upto(star_transform(omega), N - 1).values
    n = np.arange(1, N + 1)
    return float(np.max(np.abs(m[1:] - 4.0 * n * n * s) / m[1:]))


# --------------------------------------------------------------------------
# asymptotic comparisons
# --------------------------------------------------------------------------

PROBE_KINDS = ("hat_hat", "weighted_tail", "star", "alpha_tail")


@dataclass(frozen=True)
class RatioCurve:
    kind: str
    weight_id: str
    alpha: float
    r: np.ndarray
    ratio: np.ndarray

    @property
    def bounded(self) -> bool:
        return bool(np.all(np.isfinite(self.ratio)) and np.all(self.ratio > 0))

    @property
    def band(self) -> tuple:
        return float(np.min(self.ratio)), float(np.max(self.ratio))


def _weighted_tail_integral(w, r, alpha):
    def fn(s, sc):
        with np.errstate(divide="ignore", invalid="ignore", over="ignore"):
            q = np.exp(w._log_value(s, sc) - w._log_tail(s, sc))
        return q * sc ** (alpha - 1.0)

    out = np.empty(r.size)
    for i, ri in enumerate(r):
        v, e = integrate(fn, ri, 1.0, rtol=1e-8, max_level=9, raise_on_fail=False)
        out[i] = v if np.isfinite(v) and e <= 1e-6 * abs(v) else math.inf
    return out


def asymptotic_ratio_probe(kind: str, w: RadialWeight, alpha: float = 1.0,
                           radii=None) -> RatioCurve:
    """Ratio of two sides of a comparison that holds for doubling weights.

    ``hat_hat``:       int_r^1 hat / (hat(r) (1-r))
    ``weighted_tail``: int_r^1 omega (1-s)**(alpha-1) / hat ds / (1-r)**(alpha-1)
    ``star``:          omega*(r) / (hat(r) (1-r))
    ``alpha_tail``:    hat_{omega_alpha}(r) / (hat(r) (1-r)**alpha)

    A non-convergent ``weighted_tail`` integral is reported as ``inf``.
    """
    if kind not in PROBE_KINDS:
        raise ValueError(f"unknown probe {kind!r}; choose from {PROBE_KINDS}")
    r = 1.0 - np.logspace(math.log10(0.5), -4, 25) if radii is None else np.asarray(radii, float)
    rc = 1.0 - r
    hat = tail_hat(w, r, rc)
    with np.errstate(invalid="ignore", divide="ignore"):
        ratio = _probe_ratio(kind, w, alpha, r, rc, hat)
    return RatioCurve(kind, w.label, float(alpha), r, np.asarray(ratio, float))


def _probe_ratio(kind, w, alpha, r, rc, hat):
    if kind == "hat_hat":
        num = kernel_integral(w, r, rc, lambda s, sc, rr, rrc: rrc - sc,
                              lambda s, sc, rr, rrc: np.ones_like(s))
        ratio = num / (hat * rc)
    elif kind == "weighted_tail":
        ratio = _weighted_tail_integral(w, r, alpha) / rc ** (alpha - 1.0)
    elif kind == "star":
        ratio = eval_weight(star_transform(w), r, rc) / (hat * rc)
    else:
        ratio = tail_hat(alpha_shift(w, alpha), r, rc) / (hat * rc ** alpha)
    return ratio
