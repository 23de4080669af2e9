"""Double-exponential quadrature on [0, 1] and [a, inf).

The finite rule is the tanh-sinh substitution written directly on the unit
interval,

    x(t) = expit(pi sinh t),    1 - x(t) = expit(-pi sinh t),

so both the node and its distance to the right endpoint are produced without
cancellation.  Integrands receive ``(s, sc)`` with ``sc = 1 - s`` accurate to
full relative precision, which is what weights singular at ``r = 1`` need.

Levels are nested: level ``L`` uses step ``h = 2**-L`` and contains every node
of level ``L - 1``, so refining only evaluates the new (odd) nodes.  The
error estimate is the difference between consecutive levels, which is
conservative for double-exponential rules.
"""

from __future__ import annotations

from functools import lru_cache
from typing import Callable, Sequence

import numpy as np
from scipy.special import expit

DEFAULT_TMAX = 6.0
_CHUNK = 1_500_000


class QuadratureError(ArithmeticError):
    """Adaptive quadrature did not meet its tolerance.

    Carries the best estimate and its error bound.
    """

    def __init__(self, message, best, error):
        super().__init__(message)
        self.best = best
        self.error = error


@lru_cache(maxsize=64)
def _unit_new_nodes(level: int, tmax: float):
    # nodes added at this level (all nodes for level 0)
    h = 2.0 ** -level
    kmax = int(np.ceil(tmax / h))
    k = np.arange(-kmax, kmax + 1)
    if level > 0:
        k = k[k % 2 != 0]
    t = k * h
    a = np.pi * np.sinh(t)
    x = expit(a)
    xc = expit(-a)
    dxdt = np.pi * np.cosh(t) * x * xc
    keep = (x > 0) & (xc > 0) & (dxdt > 0)
    out = (x[keep], xc[keep], dxdt[keep])
    for arr in out:
        arr.setflags(write=False)
    return out


def unit_rule(level: int, tmax: float = DEFAULT_TMAX):
    """Full tanh-sinh rule on [0, 1] at ``level``.

    Returns ``(x, xc, w)`` with ``xc = 1 - x`` and weights ``w`` summing to 1.
    """
    parts = [_unit_new_nodes(lv, tmax) for lv in range(level + 1)]
    x = np.concatenate([p[0] for p in parts])
    xc = np.concatenate([p[1] for p in parts])
    w = np.concatenate([p[2] for p in parts]) * 2.0 ** -level
    order = np.argsort(x)
    return x[order], xc[order], w[order]


def unit_rule_with_count(n: int, tmax: float = 3.8):
    """Tanh-sinh rule on [0, 1] with exactly ``n`` nodes.

    Used for fixed-size radial grids; ``tmax`` trades endpoint reach
    (``min(x, 1-x)`` about ``exp(-pi sinh tmax)``) against node density.
    """
    if n < 3:
        raise ValueError("need at least 3 nodes")
    t = np.linspace(-tmax, tmax, n)
    h = t[1] - t[0]
    a = np.pi * np.sinh(t)
    x = expit(a)
    xc = expit(-a)
    w = h * np.pi * np.cosh(t) * x * xc
    return x, xc, w


@lru_cache(maxsize=64)
def _halfline_new_nodes(level: int, tmax: float):
    h = 2.0 ** -level
    kmax = int(np.ceil(tmax / h))
    k = np.arange(-kmax, kmax + 1)
    if level > 0:
        k = k[k % 2 != 0]
    t = k * h
    a = 0.5 * np.pi * np.sinh(t)
    x = np.exp(a)
    dxdt = 0.5 * np.pi * np.cosh(t) * x
    out = (x, dxdt)
    for arr in out:
        arr.setflags(write=False)
    return out


def _segments(lo, hi, breakpoints):
    """Per-row segment endpoints splitting [lo, hi] at fixed breakpoints."""
    bps = np.sort(np.asarray([b for b in breakpoints], dtype=float))
    cols = [lo]
    for b in bps:
        cols.append(np.clip(b, lo, hi))
    cols.append(hi)
    return [(cols[i], cols[i + 1]) for i in range(len(cols) - 1)]


def _level_sum(fn, lo, hi, level, tmax, breakpoints):
    """Unscaled sum over the nodes new at ``level`` (times dx/dt)."""
    x, xc, dxdt = _unit_new_nodes(level, tmax)
    total = None
    for a, b in _segments(lo, hi, breakpoints):
        length = (b - a)[:, None]
        active = (b > a)
        if not active.any():
            continue
        s = a[:, None] + length * x
        sc = (1.0 - b)[:, None] + length * xc
        # inactive (zero-length) rows may produce inf/nan; they are masked
        with np.errstate(all="ignore"):
            vals = fn(s, sc)
        vals = np.where(active[:, None], vals, 0.0)
        part = (vals * (length * dxdt)).sum(axis=-1)
        total = part if total is None else total + part
    if total is None:
        total = np.zeros(lo.shape)
    return total


def integrate(
    fn: Callable[..., np.ndarray],
    lo,
    hi=1.0,
    *,
    args: Sequence[np.ndarray] = (),
    breakpoints: Sequence[float] = (),
    rtol: float = 1e-12,
    atol: float = 0.0,
    min_level: int = 3,
    max_level: int = 10,
    tmax: float = DEFAULT_TMAX,
    raise_on_fail: bool = True,
):
    """Integrate ``fn(s, sc, *args)`` over ``[lo, hi]`` for arrays of limits.

    ``fn`` is called with 2-D arrays of shape ``(rows, nodes)``; rows
    correspond to the broadcast limits.  Each entry of ``args`` is a per-row
    array (same shape as the limits) handed to ``fn`` as a ``(rows, 1)``
    column, so row-dependent integrands survive internal chunking.
    Returns ``(value, error)`` shaped like the broadcast limits.
    """
    lo_b, hi_b, *arg_b = np.broadcast_arrays(
        np.asarray(lo, float), np.asarray(hi, float), *[np.asarray(a) for a in args]
    )
    shape = lo_b.shape
    lo_f = lo_b.ravel()
    hi_f = hi_b.ravel()
    arg_f = [a.ravel() for a in arg_b]
    if lo_f.size == 0:
        return np.zeros(shape), np.zeros(shape)

    nodes_est = 2 * int(np.ceil(tmax * 2.0 ** max_level)) * (len(breakpoints) + 1)
    step = max(1, _CHUNK // nodes_est)
    vals = []
    errs = []
    for start in range(0, lo_f.size, step):
        sl = slice(start, start + step)
        cols = [a[sl][:, None] for a in arg_f]

        def call(s, sc, _cols=cols):
            return fn(s, sc, *_cols)

        v, e = _integrate_rows(call, lo_f[sl], hi_f[sl], breakpoints, rtol,
                               atol, min_level, max_level, tmax, raise_on_fail)
        vals.append(v)
        errs.append(e)
    value = _tidy(np.concatenate(vals)).reshape(shape)
    return value, np.concatenate(errs).reshape(shape)


def _tidy(v):
    v = np.asarray(v)
    if np.iscomplexobj(v) and not np.any(v.imag):
        return v.real
    return v


def _integrate_rows(fn, lo, hi, breakpoints, rtol, atol, min_level, max_level,
                    tmax, raise_on_fail):
    acc = _level_sum(fn, lo, hi, 0, tmax, breakpoints)
    for lv in range(1, min_level + 1):
        acc = acc + _level_sum(fn, lo, hi, lv, tmax, breakpoints)
    prev = acc * 2.0 ** -min_level
    cur, err = prev, np.full(prev.shape, np.inf)
    for lv in range(min_level + 1, max_level + 1):
        acc = acc + _level_sum(fn, lo, hi, lv, tmax, breakpoints)
        cur = acc * 2.0 ** -lv
        with np.errstate(invalid="ignore"):
            err = np.abs(cur - prev)
            ok = err <= rtol * np.abs(cur) + atol
        if np.all(ok):
            return cur, err
        prev = cur
    if raise_on_fail:
        raise QuadratureError(
            f"tanh-sinh did not converge to rtol={rtol:g} by level {max_level}",
            cur, err,
        )
    return cur, err


def integrate_halfline(
    fn: Callable[[np.ndarray], np.ndarray],
    lo,
    *,
    rtol: float = 1e-12,
    atol: float = 0.0,
    min_level: int = 3,
    max_level: int = 10,
    tmax: float = 6.0,
    raise_on_fail: bool = True,
):
    """Integrate ``fn(t)`` over ``[lo, inf)`` with the exp-sinh rule.

    Suited to algebraically decaying integrands.  ``fn`` gets a 2-D array
    ``(rows, nodes)`` of abscissae.
    """
    lo_a = np.atleast_1d(np.asarray(lo, float))
    shape = np.shape(lo)
    lo_a = lo_a.ravel()

    def level_sum(level):
        x, dxdt = _halfline_new_nodes(level, tmax)
        vals = fn(lo_a[:, None] + x)
        return (vals * dxdt).sum(axis=-1)

    acc = sum(level_sum(lv) for lv in range(min_level + 1))
    prev = acc * 2.0 ** -min_level
    for lv in range(min_level + 1, max_level + 1):
        acc = acc + level_sum(lv)
        cur = acc * 2.0 ** -lv
        err = np.abs(cur - prev)
        if np.all(err <= rtol * np.abs(cur) + atol):
            return cur.reshape(shape), err.reshape(shape)
        prev = cur
    if raise_on_fail:
        raise QuadratureError("exp-sinh did not converge", cur, err)
    return cur.reshape(shape), err.reshape(shape)
