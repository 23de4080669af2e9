"""Radial weights on the unit disk, their tails, moments and transforms.

A weight is a non-negative integrable ``omega(r)`` on ``[0, 1)``.  All
evaluation goes through ``_value(r, rc)`` where ``rc = 1 - r`` is supplied
separately, so weights that are singular or vanish at ``r = 1`` keep full
relative precision at quadrature nodes that crowd the boundary.

Conventions
-----------
* ``Standard(alpha)`` is the unnormalised ``(1 - r**2)**alpha``.
* moments are ``omega_n = 2 * int_0^1 r**(2n+1) omega(r) dr``, so the total
  mass under the normalised area measure is ``omega_0``.
* the tail is ``hat(r) = int_r^1 omega(s) ds``.
"""

from __future__ import annotations

import csv
import io
import math
import threading
from dataclasses import dataclass
from functools import lru_cache
from typing import Callable, Sequence

import numpy as np
from scipy.special import betainc, betaln, expn

from .quadrature import (
    QuadratureError,
    _unit_new_nodes,
    integrate,
    integrate_halfline,
)

MOMENT_RTOL = 1e-10
_INNER_RTOL = 1e-13


class WeightDomainError(ValueError):
    """Evaluation point outside ``[0, 1)``."""


class LogSingularityError(WeightDomainError):
    """The associated weight ``omega*`` is logarithmically singular at 0."""


class OracleMismatchError(RuntimeError):
    """A closed-form moment rule disagreed with quadrature."""


def _fmt(x: float) -> str:
    x = float(x)
    return str(int(x)) if x.is_integer() and abs(x) < 1e16 else repr(x)


def _as_pair(r, rc=None):
    r = np.asarray(r, dtype=float)
    if rc is None:
        rc = 1.0 - r
    else:
        rc = np.asarray(rc, dtype=float)
    return r, rc


# --------------------------------------------------------------------------
# weight kinds
# --------------------------------------------------------------------------


class RadialWeight:
    """Base class; concrete kinds are frozen dataclasses below."""

    slow_tail = False

    @property
    def breakpoints(self) -> tuple:
        return ()

    @property
    def positive(self) -> bool:
        return True

    @property
    def label(self) -> str:
        raise NotImplementedError

    def __str__(self):
        return self.label

    def _value(self, r, rc):
        raise NotImplementedError

    def _tail(self, r, rc):
        return _quadrature_tail(self, r, rc)

    def _log_tail(self, r, rc):
        with np.errstate(divide="ignore"):
            return np.log(self._tail(r, rc))

    def _log_value(self, r, rc):
        with np.errstate(divide="ignore"):
            return np.log(self._value(r, rc))

    def _moment_oracle(self, n):
        return None

    def _moment_quadrature(self, N, rtol):
        return _radial_moment_table(self, N, rtol)


@dataclass(frozen=True)
class Standard(RadialWeight):
    """``(1 - r**2)**alpha`` with ``alpha > -1``."""

    alpha: float

    def __post_init__(self):
        if not self.alpha > -1:
            raise ValueError("Standard weight needs alpha > -1")

    @property
    def label(self):
        return f"std:alpha={_fmt(self.alpha)}"

    def _value(self, r, rc):
        return (rc * (1.0 + r)) ** self.alpha

    def _tail(self, r, rc):
        a = self.alpha + 1.0
        x = np.minimum(rc * (1.0 + r), 1.0)
        return 0.5 * np.exp(betaln(a, 0.5)) * betainc(a, 0.5, x)

    def _log_tail(self, r, rc):
        r, rc = np.broadcast_arrays(np.asarray(r, float), np.asarray(rc, float))
        a = self.alpha + 1.0
        x = rc * (1.0 + r)
        out = np.empty(x.shape)
        tiny = x < 1e-60
        # leading term of the incomplete Beta integral: x**a / a
        with np.errstate(divide="ignore"):
            out[tiny] = math.log(0.5) + a * np.log(x[tiny]) - math.log(a)
            out[~tiny] = np.log(self._tail(r[~tiny], rc[~tiny]))
        return out

    def _moment_oracle(self, n):
        n = np.asarray(n, dtype=float)
        return np.exp(betaln(n + 1.0, self.alpha + 1.0))


@dataclass(frozen=True)
class Logarithmic(RadialWeight):
    """``1 / ((1 - r) (1 - log(1 - r))**beta)`` with ``beta > 1``.

    The tail decays only like ``1/log``; quadrature works in the variable
    ``t = -log(1 - r)`` on the half line.
    """

    beta: float
    slow_tail = True

    def __post_init__(self):
        if not self.beta > 1:
            raise ValueError("Logarithmic weight needs beta > 1")

    @property
    def label(self):
        return f"log:beta={_fmt(self.beta)}"

    def _value(self, r, rc):
        return 1.0 / (rc * (1.0 - np.log(rc)) ** self.beta)

    def _tail(self, r, rc):
        return (1.0 - np.log(rc)) ** (1.0 - self.beta) / (self.beta - 1.0)

    def _tail_inverse(self, h):
        """``(r, 1 - r)`` with ``hat(r) = h``."""
        b = self.beta
        t = ((b - 1.0) * np.asarray(h, float)) ** (-1.0 / (b - 1.0)) - 1.0
        return -np.expm1(-t), np.exp(-t)

    def tail_by_quadrature(self, r, rc=None, rtol=1e-13):
        r, rc = _as_pair(r, rc)
        b = self.beta
        v, _ = integrate_halfline(lambda t: (1.0 + t) ** -b, -np.log(rc), rtol=rtol)
        return v

    def _moment_quadrature(self, N, rtol):
        n = np.arange(N + 1, dtype=float)[:, None]
        b = self.beta

        def fn(t):
            return 2.0 * np.exp((2 * n + 1) * np.log(-np.expm1(-t)) - b * np.log1p(t))

        return integrate_halfline(fn, np.zeros(N + 1), rtol=rtol, max_level=12)


def _scaled_e2(y):
    """``exp(y) * E_2(y)`` without under/overflow."""
    y = np.asarray(y, dtype=float)
    out = np.empty_like(y)
    small = y <= 50.0
    out[small] = np.exp(y[small]) * expn(2, y[small])
    yl = y[~small]
    term = np.ones_like(yl)
    acc = np.ones_like(yl)
    for k in range(1, 25):
        term = -term * (k + 1) / yl
        acc += term
    out[~small] = acc / yl
    return out


@dataclass(frozen=True)
class Exponential(RadialWeight):
    """``exp(-c / (1 - r))``; outside the doubling classes (negative control)."""

    c: float

    def __post_init__(self):
        if not self.c > 0:
            raise ValueError("Exponential weight needs c > 0")

    @property
    def label(self):
        return f"exp:c={_fmt(self.c)}"

    def _value(self, r, rc):
        return np.exp(-self.c / rc)

    def _log_value(self, r, rc):
        return -self.c / rc

    def _tail(self, r, rc):
        return np.exp(self._log_tail(r, rc))

    def _log_tail(self, r, rc):
        y = self.c / np.asarray(rc, dtype=float)
        return np.log(rc) - y + np.log(_scaled_e2(y))


@dataclass(frozen=True)
class ZeroAnnulus(RadialWeight):
    """``base`` with the annulus ``a <= r <= b`` zeroed out."""

    base: RadialWeight
    a: float
    b: float

    def __post_init__(self):
        if not 0 < self.a < self.b < 1:
            raise ValueError("ZeroAnnulus needs 0 < a < b < 1")

    @property
    def slow_tail(self):
        return self.base.slow_tail

    @property
    def _tail_inverse(self):
        # beyond the annulus the tail is the base tail
        return self.base._tail_inverse

    @property
    def label(self):
        inner = self.base.label
        if isinstance(self.base, Transformed):
            inner = f"({inner})"
        return f"zero:[{_fmt(self.a)},{_fmt(self.b)}]:{inner}"

    @property
    def breakpoints(self):
        return tuple(sorted(set(self.base.breakpoints) | {self.a, self.b}))

    @property
    def positive(self):
        return False

    def _value(self, r, rc):
        v = self.base._value(r, rc)
        return np.where((r > self.a) & (r < self.b), 0.0, v)

    def _tail(self, r, rc):
        r, rc = np.broadcast_arrays(np.asarray(r, float), np.asarray(rc, float))
        b = self.base
        tb = b._tail(np.array(self.b), np.array(1.0 - self.b))
        ta = b._tail(np.array(self.a), np.array(1.0 - self.a))
        tr = b._tail(r, rc)
        return np.where(r > self.b, tr, np.where(r >= self.a, tb, tr - ta + tb))

    def _log_value(self, r, rc):
        r, rc = np.broadcast_arrays(np.asarray(r, float), np.asarray(rc, float))
        with np.errstate(divide="ignore"):
            return np.where((r > self.a) & (r < self.b), -np.inf, self.base._log_value(r, rc))

    def _log_tail(self, r, rc):
        r, rc = np.broadcast_arrays(np.asarray(r, float), np.asarray(rc, float))
        out = np.empty(r.shape)
        outer = r > self.b
        # beyond the annulus the base may know an underflow-free form
        out[outer] = self.base._log_tail(r[outer], rc[outer])
        out[~outer] = np.log(self._tail(r[~outer], rc[~outer]))
        return out


@dataclass(frozen=True)
class Tabulated(RadialWeight):
    """Piecewise-linear interpolant of samples ``(r_i, w_i)``.

    Held constant outside the sampled range up to ``r = 1``.
    """

    r_knots: tuple
    w_knots: tuple

    def __post_init__(self):
        r = np.asarray(self.r_knots, float)
        w = np.asarray(self.w_knots, float)
        if r.ndim != 1 or r.shape != w.shape or r.size < 2:
            raise ValueError("Tabulated weight needs matching 1-D samples")
        if np.any(np.diff(r) <= 0) or r[0] < 0 or r[-1] >= 1:
            raise ValueError("sample radii must increase inside [0, 1)")
        if np.any(w < 0):
            raise ValueError("weights must be non-negative")

    @property
    def label(self):
        pairs = ",".join(f"{_fmt(a)}:{_fmt(b)}" for a, b in zip(self.r_knots, self.w_knots))
        return f"tab:[{pairs}]"

    @property
    def breakpoints(self):
        return tuple(x for x in self.r_knots if 0 < x < 1)

    @property
    def positive(self):
        return bool(np.all(np.asarray(self.w_knots) > 0))

    def _value(self, r, rc):
        return np.interp(r, self.r_knots, self.w_knots)

    def _tail(self, r, rc):
        rk = np.append(np.asarray(self.r_knots, float), 1.0)
        wk = np.append(np.asarray(self.w_knots, float), self.w_knots[-1])
        seg = 0.5 * (wk[1:] + wk[:-1]) * np.diff(rk)
        from_right = np.append(np.cumsum(seg[::-1])[::-1], 0.0)  # integral from rk[i] to 1
        r = np.asarray(r, float)
        idx = np.clip(np.searchsorted(rk, r, side="right") - 1, 0, len(rk) - 2)
        wr = np.interp(r, rk, wk)
        head = np.where(r < rk[0], wk[0] * (rk[0] - r), 0.0)
        rr = np.maximum(r, rk[0])
        partial = 0.5 * (wr + wk[idx + 1]) * (rk[idx + 1] - rr)
        return head + partial + from_right[idx + 1]


_OPS = ("plus", "star", "alpha_shift", "tilde", "r2")


@dataclass(frozen=True)
class Transformed(RadialWeight):
    """A transform of ``base``.

    ``op`` is one of ``plus`` (``2 int_r^1 omega(s) ds/s``), ``star``
    (``int_r^1 omega(s) s log(s/r) ds``), ``alpha_shift`` (``(1-r)**param *
    omega``), ``tilde`` (``hat(r)/(1-r)``) and ``r2`` (``r**2 omega``).
    """

    op: str
    base: RadialWeight
    param: float = 0.0

    def __post_init__(self):
        if self.op not in _OPS:
            raise ValueError(f"unknown transform {self.op!r}")
        if self.op == "alpha_shift" and not self.param >= 0:
            raise ValueError("alpha_shift needs alpha >= 0")

    @property
    def label(self):
        suffix = {
            "plus": "+",
            "star": "*",
            "tilde": "~",
            "r2": "^r2",
            "alpha_shift": f"^alpha={_fmt(self.param)}",
        }[self.op]
        return self.base.label + suffix

    @property
    def slow_tail(self):
        return self.op == "r2" and self.base.slow_tail

    @property
    def breakpoints(self):
        return self.base.breakpoints

    @property
    def positive(self):
        if self.op in ("alpha_shift", "r2"):
            return self.base.positive
        return True

    def plus_depth(self):
        """``(n, root)`` with ``self == root_{+n}``."""
        n, w = 0, self
        while isinstance(w, Transformed) and w.op == "plus":
            n += 1
            w = w.base
        return n, w

    def _value(self, r, rc):
        r, rc = np.broadcast_arrays(np.asarray(r, float), np.asarray(rc, float))
        if self.op == "alpha_shift":
            return rc ** self.param * self.base._value(r, rc)
        if self.op == "r2":
            return r * r * self.base._value(r, rc)
        if self.op == "tilde":
            return self.base._tail(r, rc) / rc
        return _cached_transform_value(self, r.tobytes(), rc.tobytes(), r.shape)

    def _compute_value(self, r, rc):
        if self.op == "star":
            if np.any(r <= 0):
                raise LogSingularityError(
                    "omega* has a logarithmic singularity at r = 0")
            if self.base == Standard(0.0):
                return _star_std0(r, rc)

            def K(s, sc, rr, rrc):
                return s * _log_ratio(s, sc, rr, rrc)

            def dK(s, sc, rr, rrc):
                return _log_ratio(s, sc, rr, rrc) + 1.0

            return kernel_integral(self.base, r, rc, K, dK)
        n, root = self.plus_depth()
        if np.any(r <= 0):
            raise WeightDomainError("omega_+ is infinite at r = 0")
        if root == Standard(0.0):
            return 2.0 ** n * (-np.log(r)) ** n / math.factorial(n)
        coef = 2.0 ** n / math.factorial(n - 1)

        def K(s, sc, rr, rrc):
            return _log_ratio(s, sc, rr, rrc) ** (n - 1) / s

        def dK(s, sc, rr, rrc):
            lg = _log_ratio(s, sc, rr, rrc)
            head = (n - 1) * lg ** (n - 2) if n > 1 else 0.0
            return (head - lg ** (n - 1)) / (s * s)

        return coef * kernel_integral(root, r, rc, K, dK)

    def _tail(self, r, rc):
        r, rc = np.broadcast_arrays(np.asarray(r, float), np.asarray(rc, float))
        if self.op == "alpha_shift":
            p = self.param
            if self.base == Standard(0.0):
                return rc ** (p + 1.0) / (p + 1.0)
            return kernel_integral(
                self.base, r, rc,
                lambda s, sc, *_: sc ** p,
                lambda s, sc, *_: -p * sc ** (p - 1) if p != 0 else 0.0 * s,
            )
        if self.op == "r2":
            return kernel_integral(
                self.base, r, rc,
                lambda s, sc, *_: s * s,
                lambda s, sc, *_: 2.0 * s,
            )
        if self.op == "tilde" and self.base == Standard(0.0):
            return rc
        return _quadrature_tail(self, r, rc)

    def _log_tail(self, r, rc):
        if self.op == "alpha_shift" and self.base == Standard(0.0):
            p = self.param
            with np.errstate(divide="ignore"):
                return (p + 1.0) * np.log(rc) - math.log(p + 1.0)
        return super()._log_tail(r, rc)

    def _moment_oracle(self, n):
        if self.op == "alpha_shift" and self.base == Standard(0.0):
            n = np.asarray(n, dtype=float)
            return 2.0 * np.exp(betaln(2 * n + 2.0, self.param + 1.0))
        return None


def _log_ratio(s, sc, r, rc):
    """``log(s / r)`` for ``s >= r``; complements keep it accurate near 1."""
    with np.errstate(divide="ignore", invalid="ignore"):
        near = np.log1p(-sc) - np.log1p(-rc)
        far = np.log(s / r)
    return np.where(r > 0.5, near, far)


def _star_std0(r, rc):
    # (r^2 - 1 - 2 log r) / 4, with a series near r = 1 to avoid cancellation
    out = np.empty(np.shape(r))
    far = rc > 0.1
    rf = r[far]
    out[far] = 0.25 * (rf * rf - 1.0 - 2.0 * np.log(rf))
    x = rc[~far]
    acc = 2.0 * x * x
    p = x * x
    for k in range(3, 60):
        p = p * x
        acc = acc + 2.0 * p / k
    out[~far] = 0.25 * acc
    return out


@lru_cache(maxsize=512)
def _cached_transform_value(w, rb, rcb, shape):
    r = np.frombuffer(rb, dtype=float).reshape(shape)
    rc = np.frombuffer(rcb, dtype=float).reshape(shape)
    out = np.asarray(w._compute_value(r, rc), dtype=float)
    out.setflags(write=False)
    return out


def kernel_integral(base, r, rc, K, dK, split=0.5):
    """``int_r^1 base(s) K(s) ds`` for an array of lower limits ``r``.

    For bases with a slowly decaying tail the part beyond ``c = max(r,
    split)`` is integrated by parts against the tail, ``hat(c) K(c) + int_c^1
    hat(s) K'(s) ds``, which turns an integrand of type ``1/((1-s) log**2)``
    into a bounded one.  ``K`` and ``dK`` take ``(s, sc, r, rc)``.
    """
    r, rc = np.broadcast_arrays(np.asarray(r, float), np.asarray(rc, float))
    shape = r.shape
    r = r.ravel()
    rc = rc.ravel()
    bps = base.breakpoints

    def direct(s, sc, rr, rrc):
        return base._value(s, sc) * K(s, sc, rr, rrc)

    opts = dict(args=(r, rc), breakpoints=bps, rtol=_INNER_RTOL, atol=1e-300)
    if not base.slow_tail:
        v, _ = integrate(direct, r, 1.0, **opts)
        return np.asarray(v).reshape(shape)
    c = np.maximum(r, split)
    cc = np.where(r > split, rc, 1.0 - c)
    head, _ = integrate(direct, r, c, **opts)

    def parts(s, sc, rr, rrc):
        return base._tail(s, sc) * dK(s, sc, rr, rrc)

    body, _ = integrate(parts, c, 1.0, **opts)
    edge = base._tail(c, cc) * K(c[:, None], cc[:, None], r[:, None], rc[:, None])[:, 0]
    return (head + edge + body).reshape(shape)


def _quadrature_tail(w, r, rc):
    r, rc = np.broadcast_arrays(np.asarray(r, float), np.asarray(rc, float))
    if w.slow_tail:
        raise QuadratureError(f"no convergent tail quadrature for {w.label}", None, None)
    v, _ = integrate(lambda s, sc: w._value(s, sc), r, 1.0,
                     breakpoints=w.breakpoints, rtol=_INNER_RTOL)
    return np.asarray(v)


# --------------------------------------------------------------------------
# moments
# --------------------------------------------------------------------------


@dataclass(frozen=True)
class MomentTable:
    """Moments ``omega_0 .. omega_N`` with absolute error estimates."""

    weight_id: str
    values: np.ndarray
    errors: np.ndarray
    method: str

    @property
    def max_index(self) -> int:
        return len(self.values) - 1

    def __len__(self):
        return len(self.values)

    def __getitem__(self, n):
        return self.values[n]

    def truncated(self, N: int) -> "MomentTable":
        if N > self.max_index:
            raise ValueError(f"table only reaches n = {self.max_index}")
        return MomentTable(self.weight_id, self.values[: N + 1],
                           self.errors[: N + 1], self.method)

    def check_invariants(self):
        v = self.values
        if not np.all(v > 0):
            raise ValueError(f"{self.weight_id}: non-positive moment")
        if not np.all(np.diff(v) < 0):
            raise ValueError(f"{self.weight_id}: moments not strictly decreasing")

    def to_csv(self, fh=None) -> str:
        buf = io.StringIO()
        wr = csv.writer(buf, lineterminator="\n")
        wr.writerow(["n", "value", "abs_error", "method"])
        for n, (v, e) in enumerate(zip(self.values, self.errors)):
            wr.writerow([n, f"{v:.17g}", f"{e:.17g}", self.method])
        text = buf.getvalue()
        if fh is not None:
            fh.write(text)
        return text

    @classmethod
    def from_csv(cls, text: str, weight_id: str = "") -> "MomentTable":
        rows = list(csv.DictReader(io.StringIO(text)))
        values = np.array([float(r["value"]) for r in rows])
        errors = np.array([float(r["abs_error"]) for r in rows])
        method = rows[0]["method"] if rows else "quadrature"
        return cls(weight_id, values, errors, method)


def _radial_moment_table(w, N, rtol, fn=None, breakpoints=None,
                         min_level=4, max_level=11):
    """Moments of ``fn`` (default ``w._value``) in the variable ``u = r**2``.

    ``omega_n = int_0^1 u**n f(sqrt(u)) du``; for slowly decaying tails the
    integration-by-parts form ``(2n+1) int_0^1 u**(n-1/2) hat(sqrt u) du`` is
    used instead.  Returns ``(values, errors)``.
    """
    if fn is None:
        if w.slow_tail:
            def fn(r, rc):
                return w._tail(r, rc) / r
            scale = 2 * np.arange(N + 1) + 1.0
        else:
            fn = w._value
            scale = np.ones(N + 1)
        bps = w.breakpoints
    else:
        scale = np.ones(N + 1)
        bps = breakpoints or ()
    edges = [0.0] + sorted(b * b for b in bps) + [1.0]
    n = np.arange(N + 1, dtype=float)[:, None]
    acc = np.zeros(N + 1)
    prev = cur = err = None
    for level in range(max_level + 1):
        x, xc, dxdt = _unit_new_nodes(level, 6.0)
        for a, b in zip(edges[:-1], edges[1:]):
            if b <= a:
                continue
            u = a + (b - a) * x
            uc = (1.0 - b) + (b - a) * xc
            r = np.sqrt(u)
            rc = uc / (1.0 + r)
            f = np.asarray(fn(r, rc), dtype=float)
            acc += np.exp(n * np.log(u)) @ ((b - a) * dxdt * f)
        cur = acc * 2.0 ** -level * scale
        if level > min_level:
            err = np.abs(cur - prev)
            if np.all(err <= rtol * np.abs(cur)):
                return cur, err
        prev = cur
    raise QuadratureError(
        f"moments of {w.label if w is not None else 'profile'} did not converge "
        f"to rtol={rtol:g}", cur, err)


def profile_moments(fn: Callable, N: int, breakpoints: Sequence[float] = (),
                    rtol: float = 1e-12):
    """Moments ``2 int_0^1 r**(2n+1) fn(r, 1-r) dr`` of an arbitrary profile."""
    return _radial_moment_table(None, N, rtol, fn=fn, breakpoints=breakpoints)


_MOMENT_CACHE: dict = {}
_CACHE_LOCK = threading.Lock()


def _oracle_gate(w):
    """Check a closed-form moment rule against quadrature at two tolerances."""
    key = ("gate", w)
    if key in _MOMENT_CACHE:
        return
    ns = np.array([0, 1, 2, 7, 20])
    exact = w._moment_oracle(ns)
    for tol in (1e-8, 1e-11):
        q, _ = _radial_moment_table(w, 20, tol)
        q = q[ns]
        if np.any(np.abs(q - exact) > 10 * tol * np.abs(exact)):
            raise OracleMismatchError(
                f"closed-form moments of {w.label} disagree with quadrature")
    with _CACHE_LOCK:
        _MOMENT_CACHE.setdefault(key, True)


def moments_upto(w: RadialWeight, N: int, rtol: float = MOMENT_RTOL,
                 method: str = "auto") -> MomentTable:
    """Table of ``omega_n`` for ``n <= N``.

    ``method`` is ``auto`` (closed form when available), ``closed_form`` or
    ``quadrature``.
    """
    if N < 0:
        raise ValueError("N must be >= 0")
    use_oracle = method != "quadrature" and w._moment_oracle(np.array([0])) is not None
    if method == "closed_form" and not use_oracle:
        raise ValueError(f"{w.label} has no closed-form moments")
    key = (w, rtol, use_oracle)
    hit = _MOMENT_CACHE.get(key)
    if hit is not None and hit.max_index >= N:
        return hit.truncated(N)
    if use_oracle:
        _oracle_gate(w)
        n = np.arange(N + 1)
        vals = w._moment_oracle(n)
        errs = 4 * np.finfo(float).eps * vals
        table = MomentTable(w.label, vals, errs, "closed_form")
    else:
        vals, errs = w._moment_quadrature(N, rtol)
        table = MomentTable(w.label, np.asarray(vals), np.asarray(errs), "quadrature")
    table.check_invariants()
    with _CACHE_LOCK:
        old = _MOMENT_CACHE.get(key)
        if old is None or old.max_index < N:
            _MOMENT_CACHE[key] = table
    return table


def moment(w: RadialWeight, n: int, rtol: float = MOMENT_RTOL,
           method: str = "auto") -> float:
    """``omega_n = 2 int_0^1 r**(2n+1) omega(r) dr``."""
    if n < 0:
        raise ValueError("n must be >= 0")
    return float(moments_upto(w, n, rtol, method).values[n])


def total_mass(w: RadialWeight) -> float:
    """``omega(D)`` under the normalised area measure, i.e. ``omega_0``."""
    return moment(w, 0)


# --------------------------------------------------------------------------
# public evaluation API
# --------------------------------------------------------------------------


def _check_r(r, rc=None):
    """Reject points outside ``[0, 1)``; an explicit ``rc > 0`` keeps ``r``
    admissible even where ``r`` itself rounds to 1."""
    r = np.asarray(r, dtype=float)
    inside = r < 1 if rc is None else np.asarray(rc, dtype=float) > 0
    if np.any(~inside) or np.any(r < 0) or np.any(r > 1):
        raise WeightDomainError("r must lie in [0, 1)")
    return r


def eval_weight(w: RadialWeight, r, rc=None):
    """``omega(r)``; ``rc`` optionally supplies ``1 - r`` at full precision."""
    r = _check_r(r, rc)
    r, rc = _as_pair(r, rc)
    out = w._value(r, rc)
    return float(out) if np.ndim(out) == 0 else np.asarray(out)


def tail_hat(w: RadialWeight, r, rc=None, method: str = "auto"):
    """``hat(r) = int_r^1 omega(s) ds``.

    ``method='quadrature'`` bypasses closed forms (used to cross-check them).
    """
    r = _check_r(r, rc)
    r, rc = _as_pair(r, rc)
    if method == "quadrature":
        if isinstance(w, Logarithmic):
            out = w.tail_by_quadrature(r, rc)
        else:
            out = _quadrature_tail(w, r, rc)
    else:
        out = w._tail(r, rc)
    return float(out) if np.ndim(out) == 0 else np.asarray(out)


def log_tail_hat(w: RadialWeight, r, rc=None):
    """``log hat(r)``, computed without underflow where the kind allows it."""
    r = _check_r(r, rc)
    r, rc = _as_pair(r, rc)
    out = w._log_tail(r, rc)
    return float(out) if np.ndim(out) == 0 else np.asarray(out)


def log_weight(w: RadialWeight, r, rc=None):
    """``log omega(r)`` (``-inf`` where the weight vanishes)."""
    r = _check_r(r, rc)
    r, rc = _as_pair(r, rc)
    out = w._log_value(r, rc)
    return float(out) if np.ndim(out) == 0 else np.asarray(out)


def plus_transform(w: RadialWeight) -> Transformed:
    """``omega_+(r) = 2 int_r^1 omega(s) ds / s``."""
    return Transformed("plus", w)


def plus_n(w: RadialWeight, n: int) -> RadialWeight:
    """``omega_{+n}``, with ``omega_{+0} = omega``."""
    for _ in range(n):
        w = plus_transform(w)
    return w


def star_transform(w: RadialWeight) -> Transformed:
    """``omega*(r) = int_r^1 omega(s) s log(s/r) ds``."""
    return Transformed("star", w)


def alpha_shift(w: RadialWeight, alpha: float) -> Transformed:
    """``omega_alpha(r) = (1 - r)**alpha omega(r)``."""
    return Transformed("alpha_shift", w, float(alpha))


def tilde_weight(w: RadialWeight) -> Transformed:
    """``hat(r) / (1 - r)``."""
    return Transformed("tilde", w)


def r2_multiply(w: RadialWeight) -> Transformed:
    """``r**2 omega(r)``."""
    return Transformed("r2", w)


def library() -> dict:
    """Named weights used across the test matrix."""
    return {
        "std0": Standard(0.0),
        "std1": Standard(1.0),
        "std1.5": Standard(1.5),
        "std-0.5": Standard(-0.5),
        "shift1": alpha_shift(Standard(0.0), 1.0),
        "shift2.5": alpha_shift(Standard(0.0), 2.5),
        "zero": ZeroAnnulus(Standard(1.0), 0.3, 0.4),
        "log2": Logarithmic(2.0),
        "exp1": Exponential(1.0),
    }


DOUBLING_NAMES = ("std0", "std1", "std1.5", "std-0.5", "shift1", "shift2.5", "zero")
