"""Polar quadrature grids for integrals over the unit disk.

A grid carries radial nodes ``r_j`` (with exact complements ``1 - r_j``) and
weights for ``int_0^{r_max} F(r) dr``, together with ``M`` equispaced angles.
With the normalised area measure ``dA = r dr dtheta / pi``,

    int_D F dA  ~  sum_j w_j * 2 r_j * mean_m F(r_j, theta_m).

The angular trapezoid rule is exact for trigonometric polynomials of degree
below ``M``, so ``z**m conj(z)**n`` is integrated exactly in angle whenever
``|m - n| < M``.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .quadrature import unit_rule_with_count
from .weights import RadialWeight, moments_upto

DEFAULT_TMAX = 3.8


class GridResolutionError(ValueError):
    """Grid too coarse for the requested degree."""


@dataclass(frozen=True, eq=False)
class PolarGrid:
    """Radial nodes times ``M`` equispaced angles.

    Attributes
    ----------
    r, rc : ndarray
        Radial nodes and ``1 - r`` at full precision.
    w : ndarray
        Weights for ``int F(r) dr`` over ``[0, r_max]``.
    M : int
        Number of angles ``2 pi m / M``.
    tail_closed : bool
        True when the nodes already carry the mass up to ``r = 1``.
    """

    r: np.ndarray
    rc: np.ndarray
    w: np.ndarray
    M: int
    r_max: float = 1.0
    tail_closed: bool = False

    @classmethod
    def build(cls, J: int, M: int, breakpoints=(), r_max: float = 1.0,
              tmax: float = DEFAULT_TMAX, mass_weight: RadialWeight | None = None
              ) -> "PolarGrid":
        """``J`` double-exponential nodes on each smooth segment of ``[0, r_max]``.

        Segments are cut at ``breakpoints`` so that weights with jumps (such
        as zero annuli) are integrated piecewise.

        ``mass_weight`` (a weight with a ``_tail_inverse``) switches the
        outermost segment ``[a, 1)`` to the tail-mass coordinate
        ``s = hat(r) / hat(a)``, in which ``int_a^1 F omega dr`` becomes
        ``hat(a) int_0^1 F ds``.  Weights whose tails decay like a power of
        ``log(1 - r)`` keep mass within rounding distance of ``r = 1``; in
        this coordinate that mass is reached.
        """
        if M < 1:
            raise ValueError("M must be positive")
        if not 0 < r_max <= 1:
            raise ValueError("r_max must lie in (0, 1]")
        x, xc, wx = unit_rule_with_count(J, tmax)
        edges = [0.0] + sorted(b for b in breakpoints if 0 < b < r_max) + [r_max]
        by_mass = mass_weight is not None and r_max == 1.0
        if by_mass and len(edges) == 2:
            edges.insert(1, 0.5)
        rs, rcs, ws = [], [], []
        for i, (a, b) in enumerate(zip(edges[:-1], edges[1:])):
            if by_mass and i == len(edges) - 2:
                mass = float(mass_weight._tail(np.array(a), np.array(1.0 - a)))
                with np.errstate(under="ignore"):
                    r, rc = mass_weight._tail_inverse(mass * x)
                # nodes whose 1 - r underflows sit at r = 1 for any smooth F;
                # their weight moves to the outermost representable node
                keep = rc > 1e-300
                wk = wx[keep].copy()
                wk[np.argmin(rc[keep])] += wx[~keep].sum()
                r, rc = r[keep], rc[keep]
                rs.append(r)
                rcs.append(rc)
                ws.append(mass * wk / mass_weight._value(r, rc))
                continue
            length = b - a
            rs.append(a + length * x)
            rcs.append((1.0 - b) + length * xc)
            ws.append(length * wx)
        r = np.concatenate(rs)
        # away from the boundary 1 - r is exact enough and never exceeds 1
        rc = np.where(r < 0.5, 1.0 - r, np.concatenate(rcs))
        return cls(r, rc, np.concatenate(ws), int(M), float(r_max), tail_closed=by_mass)

    @classmethod
    def for_weight(cls, w: RadialWeight, J: int, M: int, r_max: float = 1.0,
                   tmax: float = DEFAULT_TMAX) -> "PolarGrid":
        mass = w if hasattr(w, "_tail_inverse") else None
        return cls.build(J, M, w.breakpoints, r_max, tmax, mass_weight=mass)

    @property
    def J(self) -> int:
        return self.r.size

    @property
    def max_degree(self) -> int:
        """Largest ``N`` with ``z**m conj(z)**n`` exact in angle for ``m, n <= N``."""
        return (self.M - 1) // 2

    @property
    def angles(self) -> np.ndarray:
        return 2.0 * np.pi * np.arange(self.M) / self.M

    def points(self) -> np.ndarray:
        """Complex nodes ``r_j exp(i theta_m)`` as a ``(J, M)`` array."""
        return self.r[:, None] * np.exp(1j * self.angles)[None, :]

    def radial_weights(self, weight: RadialWeight | None = None) -> np.ndarray:
        """``w_j * 2 r_j * omega(r_j)`` (``omega = 1`` if ``weight`` is None).

        When the grid reaches ``r = 1`` the mass ``hat(r_last)`` beyond the
        outermost node is lumped onto that node.  Slowly decaying weights
        keep a visible fraction of their mass within rounding distance of
        the boundary, which no node can resolve.
        """
        out = 2.0 * self.r * self.w
        if weight is not None:
            out = out * weight._value(self.r, self.rc)
        if self.r_max == 1.0 and not self.tail_closed:
            last = int(np.argmin(self.rc))
            r, rc = self.r[last:last + 1], self.rc[last:last + 1]
            rest = rc if weight is None else weight._tail(r, rc)
            out[last] += 2.0 * r[0] * float(rest[0])
        return out

    def integrate(self, values, weight: RadialWeight | None = None):
        """``int_D F omega dA`` for samples ``F`` of shape ``(J, M)`` or ``(J,)``."""
        values = np.asarray(values)
        if values.ndim == 2:
            values = values.mean(axis=1)
        return np.sum(self.radial_weights(weight) * values)

    def calibration_error(self, weight: RadialWeight, N: int | None = None) -> float:
        """Largest relative error in reproducing ``delta_mn omega_n``.

        Diagonal terms compare the radial sums with the moment table; the
        off-diagonal angular means are computed directly and scaled by the
        smallest diagonal moment.
        """
        N = self.max_degree if N is None else N
        if N > self.max_degree:
            raise GridResolutionError(
                f"degree {N} exceeds grid resolution {self.max_degree}")
        n = np.arange(N + 1)
        rw = self.radial_weights(weight)
        with np.errstate(under="ignore"):
            pows = np.exp(np.outer(2 * n, np.log(self.r)))
        diag = pows @ rw
        table = moments_upto(weight, N).values
        err = np.max(np.abs(diag - table) / table)
        d = np.arange(1, 2 * N + 1)
        off = np.abs(np.exp(1j * np.outer(d, self.angles)).mean(axis=1)).max() if N else 0.0
        return float(max(err, off * diag.max() / table.min()))
