"""Acceptance criteria, one test per criterion.

Each test prints a single ``PASS``/``FAIL`` line with the measured value and
the pinned tolerance, then asserts.  Run with ``pytest tests/test_acceptance.py``;
the lines are printed even without ``-s``.
"""

import time

import numpy as np
import pytest

from bergfrac import analysis, kernels, operators, projection
from bergfrac.grid import PolarGrid
from bergfrac.series import PowerSeries, dilate
from bergfrac.weights import (
    DOUBLING_NAMES,
    Exponential,
    Logarithmic,
    Standard,
    ZeroAnnulus,
    alpha_shift,
    library,
    moments_upto,
    plus_transform,
    star_transform,
)

SEED = 20240601

# pinned tolerances
FUBINI_REL = 1e-8
STAR_REL = 1e-8
OPERATOR_QUAD = 1e-8
OPERATOR_CLOSED = 1e-12
KERNEL_MAP_REL = 1e-8
DILATION_ABS = 1e-8
PREIMAGE_FACTORED = 1e-10
PREIMAGE_GRID = 1e-6
PREIMAGE_REGULAR = 1e-8
LP_REL = 1e-8
EIGHT_OVER_PI = 2.546479
EIGHT_OVER_PI_GAP = 0.02
CLASS_CONSTANT_REL = 0.05
SUP_RATIO_REL = 0.10
REFINEMENT_REL = 0.05
DECAY_FRACTION = 0.01

# runtime limits in seconds
LIMIT_MOMENTS = 30.0
LIMIT_BLOCH = 120.0
LIMIT_EIGHT_OVER_PI = 300.0

MOMENT_WEIGHTS = [Standard(0.0), Standard(1.5), Logarithmic(2.0),
                  ZeroAnnulus(Standard(1.0), 0.3, 0.4)]
POLY16 = PowerSeries([1, 0.5, -0.25j, 2, 0, 0, 1] + [0] * 9 + [0.125])


@pytest.fixture
def report(capsys):
    def emit(number, title, ok, detail):
        with capsys.disabled():
            print(f"\n[{'PASS' if ok else 'FAIL'}] #{number:<2d} {title}: {detail}")
        return ok
    return emit


def random_polys(count, degree, seed=SEED):
    rng = np.random.default_rng(seed)
    return [PowerSeries.random(rng, degree) for _ in range(count)]


def moment_identity_errors(w, N=100):
    m = moments_upto(w, N + 1).values
    n = np.arange(N + 1)
    fub = np.abs(moments_upto(plus_transform(w), N).values - m[:-1] / (n + 1)) / m[:-1]
    ms = moments_upto(star_transform(w), N).values
    star = np.abs(ms - m[1:] / (4.0 * (n + 1) ** 2)) / ms
    return float(fub.max()), float(star.max())


def test_01_fubini_moment_identity(report):
    t0 = time.perf_counter()
    worst = max(moment_identity_errors(w)[0] for w in MOMENT_WEIGHTS)
    elapsed = time.perf_counter() - t0
    ok = worst <= FUBINI_REL and elapsed < LIMIT_MOMENTS
    assert report(1, "plus-transform moments, n <= 100", ok,
                  f"max rel err {worst:.2e} (tol {FUBINI_REL:g}), "
                  f"{elapsed:.1f} s (limit {LIMIT_MOMENTS:g} s)")


def test_02_star_moment_identity(report):
    worst = max(moment_identity_errors(w)[1] for w in MOMENT_WEIGHTS)
    assert report(2, "star-transform moments, n <= 100", worst <= STAR_REL,
                  f"max rel err {worst:.2e} (tol {STAR_REL:g})")


def test_03_operator_identities(report):
    N = 200
    closed = [Standard(0.0), Standard(1.0), Standard(1.5), Standard(-0.5)]
    mixed = [Standard(1.5), Logarithmic(2.0), ZeroAnnulus(Standard(1.0), 0.3, 0.4),
             alpha_shift(Standard(0.0), 2.5)]

    def worst(ws):
        return max(max(operators.identity_residuals(*(ws[(i + j) % 4] for j in range(4)),
                                                    N).values())
                   for i in range(4))

    wc, wq = worst(closed), worst(mixed)
    ok = wc <= OPERATOR_CLOSED and wq <= OPERATOR_QUAD
    assert report(3, "commutation, composition, inversion, k <= 200", ok,
                  f"closed form {wc:.2e} (tol {OPERATOR_CLOSED:g}), "
                  f"quadrature {wq:.2e} (tol {OPERATOR_QUAD:g})")


def test_04_kernel_mapping_and_dilation(report):
    N = 200
    rng = np.random.default_rng(SEED)
    pairs = [(Standard(0.0), Standard(1.5)), (Standard(1.5), Logarithmic(2.0)),
             (Logarithmic(2.0), ZeroAnnulus(Standard(1.0), 0.3, 0.4))]
    kmap = dil = 0.0
    for omega, nu in pairs:
        R = operators.build(omega, nu, N)
        for _ in range(10):
            z = 0.95 * np.sqrt(rng.uniform()) * np.exp(2j * np.pi * rng.uniform())
            r = rng.uniform(0.05, 0.95)
            lhs = R(kernels.kernel_slice(omega, z, N).series).coeffs
            rhs = kernels.kernel_slice(nu, z, N).coeffs
            nz = np.abs(rhs) > 1e-300
            kmap = max(kmap, float(np.max(np.abs(lhs[nz] - rhs[nz]) / np.abs(rhs[nz]))))
            f = PowerSeries.random(rng, 32)
            dil = max(dil, float(np.max(np.abs(R(dilate(f, r)).coeffs
                                               - dilate(R(f), r).coeffs))))
    ok = kmap <= KERNEL_MAP_REL and dil <= DILATION_ABS
    assert report(4, "kernel mapping and dilation, 10 anchors per pair", ok,
                  f"kernel map rel {kmap:.2e} (tol {KERNEL_MAP_REL:g}), "
                  f"dilation abs {dil:.2e} (tol {DILATION_ABS:g})")


def test_05_bloch_preimage_round_trip(report):
    lib = library()
    series = [POLY16, *random_polys(2, 16), PowerSeries.logfn(64)]
    t0 = time.perf_counter()
    ef = eg = 0.0
    for name in DOUBLING_NAMES:
        w = lib[name]
        for alpha in (0.5, 1.0, 2.0):
            for h in series:
                N = h.degree
                grid = PolarGrid.for_weight(w, 200, 2 * N + 2)
                g = projection.preimage_bloch(w, h, alpha, grid=grid)
                fac = projection.project_factored(w, g.profile, g.analytic, N)
                ef = max(ef, float(np.max(np.abs(fac.coeffs - h.coeffs))))
                eg = max(eg, float(np.max(np.abs(projection.project(w, g, N).coeffs
                                                 - h.coeffs))))
    elapsed = time.perf_counter() - t0
    ok = ef <= PREIMAGE_FACTORED and eg <= PREIMAGE_GRID and elapsed < LIMIT_BLOCH
    assert report(5, "Bloch-type pre-image projects back to h", ok,
                  f"factored {ef:.2e} (tol {PREIMAGE_FACTORED:g}), grid {eg:.2e} "
                  f"(tol {PREIMAGE_GRID:g}), {elapsed:.1f} s (limit {LIMIT_BLOCH:g} s)")


def test_06_regular_preimage_round_trip(report):
    weights = [Standard(0.0), Standard(1.0), Standard(1.5), Standard(-0.5)]
    series = [POLY16, PowerSeries([0, 1]), *random_polys(3, 16, SEED + 1)]
    worst = 0.0
    for w in weights:
        for f in series:
            N = f.degree
            g = projection.preimage_regular(w, f, grid=PolarGrid.for_weight(w, 200, 2 * N + 2))
            for rec in (projection.project_factored(w, g.profile, g.analytic, N, g.offset),
                        projection.project(w, g, N)):
                worst = max(worst, float(np.max(np.abs(rec.coeffs - f.coeffs))))
    assert report(6, "regular-weight pre-image projects back to f", worst <= PREIMAGE_REGULAR,
                  f"max abs err {worst:.2e} (tol {PREIMAGE_REGULAR:g})")


def test_07_littlewood_paley_identities(report):
    ws = [Standard(1.5), Logarithmic(2.0), ZeroAnnulus(Standard(1.0), 0.3, 0.4)]
    rng = np.random.default_rng(SEED)
    pairs = [(PowerSeries.random(rng, 50), PowerSeries.random(rng, 50)) for _ in range(50)]
    orders = [(a, b) for a in range(5) for b in range(5 - a)]
    classical = frac = 0.0
    for i, w in enumerate(ws):
        eta, nu = ws[(i + 1) % 3], ws[(i + 2) % 3]
        for f, g in pairs:
            classical = max(classical, analysis.lp_identity_residual(f, g, w)
                       / analysis.lp_identity_scale(f, g, w))
            frac = max(frac, *(analysis.frac_lp_residual(f, g, w, eta, nu, a, b)
                               for a, b in orders))
    ok = classical <= LP_REL and frac <= LP_REL
    assert report(7, "Littlewood-Paley identities, 50 pairs x 3 weights", ok,
                  f"classical {classical:.2e}, fractional {frac:.2e} (tol {LP_REL:g})")


def test_08_eight_over_pi(report):
    w = Standard(0.0)
    t0 = time.perf_counter()
    values = [kernels.dbar_norm_scaled(w, 1.0 - 2.0 ** -j, J=200)[0] for j in range(1, 11)]
    elapsed = time.perf_counter() - t0
    increasing = all(b > a for a, b in zip(values, values[1:]))
    gap = values[-1] / EIGHT_OVER_PI - 1.0
    ok = increasing and abs(gap) <= EIGHT_OVER_PI_GAP and elapsed < LIMIT_EIGHT_OVER_PI
    assert report(8, "A^1 norm of the conj-derivative kernel approaches 8/pi", ok,
                  f"increasing={increasing}, j=10 value {values[-1]:.6f}, gap {gap:+.2%} "
                  f"(tol {EIGHT_OVER_PI_GAP:.0%}), {elapsed:.1f} s "
                  f"(limit {LIMIT_EIGHT_OVER_PI:g} s)")


def test_09_classifier_ground_truth(report):
    worst = 0.0
    for alpha in (0.5, 1.0, 2.5):
        rep = analysis.classify(alpha_shift(Standard(0.0), alpha))
        worst = max(worst, abs(rep.dhat.value / 2.0 ** (alpha + 1) - 1.0))
    log2 = analysis.classify(Logarithmic(2.0))
    exp1 = analysis.classify(Exponential(1.0))
    ok = (worst <= CLASS_CONSTANT_REL and log2.dhat.verdict and not log2.dcheck.verdict
          and not exp1.dhat.verdict)
    assert report(9, "classifier ground truth", ok,
                  f"shift constant rel err {worst:.2e} (tol {CLASS_CONSTANT_REL:.0%}), "
                  f"log2 upper={log2.dhat.verdict} lower={log2.dcheck.verdict}, "
                  f"exp1 upper={exp1.dhat.verdict}")


def test_10_sup_ratio_stable_under_refinement(report):
    lib = library()
    h = PowerSeries.logfn(64)
    worst = 0.0
    for name in ("std0", "std1.5", "shift1", "zero"):
        for alpha in (0.5, 1.0, 2.0):
            vals = [analysis.bloch_preimage_sup_ratio(lib[name], h, alpha, J=J)
                    for J in (100, 200, 400)]
            worst = max(worst, max(abs(b / a - 1.0) for a, b in zip(vals, vals[1:])))
    assert report(10, "sup |g| / Bloch norm of h under grid refinement",
                  worst <= SUP_RATIO_REL,
                  f"max relative change {worst:.2e} (tol {SUP_RATIO_REL:.0%})")


def test_11_besov_surrogate_stabilizes(report):
    series = [PowerSeries([1, 1, 0.5]), PowerSeries([0, 0, 0, 1, 0, 0.5j])]
    worst, all_stable = 0.0, True
    for w in (Standard(0.0), Standard(1.0)):
        for h in series:
            g = projection.preimage_bloch(w, h, 1.5)
            for p in (1.0, 2.0):
                rep = analysis.lp_lambda_omega_norm(g, w, p)
                hist = np.asarray(rep.history)
                worst = max(worst, float(np.max(np.abs(hist[-3:] / hist[-4:-1] - 1.0))))
                all_stable &= not rep.diverged
    ok = all_stable and worst < REFINEMENT_REL
    assert report(11, "L^p(lambda_omega) norm of g_1.5 under refinement, p in {1, 2}", ok,
                  f"last three changes max {worst:.2e} (tol {REFINEMENT_REL:.0%})")


def test_12_little_bloch_decay(report):
    # h = 1 + z + z**2 with alpha = 1; at a fixed radius the fraction scales
    # like (1 - r)**alpha, so smaller alpha or h peaking near 0 can exceed 1%
    lib = library()
    h = PowerSeries([1, 1, 1])
    radii = np.unique(np.concatenate([np.linspace(0, 0.99, 100), [0.995, 0.999]]))
    worst = 0.0
    for name in DOUBLING_NAMES:
        r, curve = projection.little_bloch_decay(lib[name], h, 1.0, radii)
        worst = max(worst, float(curve[r == 0.999][0] / curve.max()))
    assert report(12, "pre-image of 1 + z + z^2 (alpha = 1) decays at the boundary",
                  worst <= DECAY_FRACTION,
                  f"max value at r=0.999 / curve max {worst:.2e} (tol {DECAY_FRACTION:.0%})")
