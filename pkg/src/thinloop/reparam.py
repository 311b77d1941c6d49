"""C1 monotone reparametrizations with prescribed critical values.

Everything here is built from one bump profile ``f(x) = x - sin(2 pi x)/(2 pi)``:
increasing, onto [0, 1], derivative ``1 - cos(2 pi x)`` vanishing only at the
endpoints, with sup |f'| = 2.
"""
from __future__ import annotations

from dataclasses import dataclass
from typing import Iterable, Sequence

import numpy as np

TWO_PI = 2.0 * np.pi

#: sup |psi'| certified by the construction in :func:`psi`.
PSI_DERIVATIVE_BOUND = 4.0


def bump(x):
    x = np.asarray(x, dtype=float)
    if np.any((x < 0.0) | (x > 1.0)):
        raise ValueError("bump is defined on [0, 1]")
    return x - np.sin(TWO_PI * x) / TWO_PI


def bump_prime(x):
    x = np.asarray(x, dtype=float)
    if np.any((x < 0.0) | (x > 1.0)):
        raise ValueError("bump is defined on [0, 1]")
    return 1.0 - np.cos(TWO_PI * x)


def bump_inverse(y):
    """Inverse of :func:`bump` by vectorized bisection (f is flat at the ends)."""
    y = np.asarray(y, dtype=float)
    lo = np.zeros_like(y)
    hi = np.ones_like(y)
    for _ in range(64):
        mid = 0.5 * (lo + hi)
        below = mid - np.sin(TWO_PI * mid) / TWO_PI < y
        lo = np.where(below, mid, lo)
        hi = np.where(below, hi, mid)
    return 0.5 * (lo + hi)


@dataclass(frozen=True)
class MonotoneC1Map:
    """Piecewise map through increasing knots.

    Between ``x_knots[k]`` and ``x_knots[k+1]`` the map is either the affine
    image of the bump profile (``kinds[k] == "bump"``, zero slope at both
    knots) or the straight line through the knot values (``"linear"``).
    """

    x_knots: np.ndarray
    y_knots: np.ndarray
    kinds: tuple

    def __post_init__(self):
        x = np.asarray(self.x_knots, dtype=float)
        y = np.asarray(self.y_knots, dtype=float)
        object.__setattr__(self, "x_knots", x)
        object.__setattr__(self, "y_knots", y)
        if len(x) < 2 or len(x) != len(y) or len(self.kinds) != len(x) - 1:
            raise ValueError("knot arrays inconsistent")
        if np.any(np.diff(x) <= 0):
            raise ValueError("x knots must be strictly increasing")
        if np.any(np.diff(y) < 0):
            raise ValueError("y knots must be non-decreasing")

    @property
    def domain(self) -> tuple[float, float]:
        return float(self.x_knots[0]), float(self.x_knots[-1])

    def _locate(self, x):
        x = np.asarray(x, dtype=float)
        lo, hi = self.domain
        span = hi - lo
        if np.any((x < lo - 1e-12 * max(1.0, span)) | (x > hi + 1e-12 * max(1.0, span))):
            raise ValueError("argument outside the map's domain")
        x = np.clip(x, lo, hi)
        k = np.clip(np.searchsorted(self.x_knots, x, side="right") - 1, 0, len(self.x_knots) - 2)
        x0 = self.x_knots[k]
        w = self.x_knots[k + 1] - x0
        u = np.clip((x - x0) / w, 0.0, 1.0)
        is_bump = np.array([kd == "bump" for kd in self.kinds])[k]
        return k, u, w, is_bump

    def __call__(self, x):
        k, u, _, is_bump = self._locate(x)
        y0 = self.y_knots[k]
        h = self.y_knots[k + 1] - y0
        prof = np.where(is_bump, u - np.sin(TWO_PI * u) / TWO_PI, u)
        return y0 + h * prof

    def derivative(self, x):
        k, u, w, is_bump = self._locate(x)
        h = self.y_knots[k + 1] - self.y_knots[k]
        prof = np.where(is_bump, 1.0 - np.cos(TWO_PI * u), 1.0)
        return h / w * prof

    def derivative_bound(self) -> float:
        slopes = np.diff(self.y_knots) / np.diff(self.x_knots)
        factor = np.array([2.0 if kd == "bump" else 1.0 for kd in self.kinds])
        return float(np.max(slopes * factor))

    def critical_values(self) -> np.ndarray:
        """Values taken where the derivative vanishes (exact, from the pieces)."""
        vals = []
        n = len(self.kinds)
        for k in range(n + 1):
            left = self.kinds[k - 1] if k > 0 else None
            right = self.kinds[k] if k < n else None
            flat_left = left is None or left == "bump" or self.y_knots[k] == self.y_knots[k - 1]
            flat_right = right is None or right == "bump" or self.y_knots[k + 1] == self.y_knots[k]
            if flat_left and flat_right:
                vals.append(self.y_knots[k])
        return np.unique(np.asarray(vals))

    def conjugate(self, a: float, b: float, c: float, d: float) -> "MonotoneC1Map":
        """Affinely transport [x0, x1] -> [a, b] and [y0, y1] -> [c, d]."""
        x0, x1 = self.domain
        y0, y1 = self.y_knots[0], self.y_knots[-1]
        xs = a + (self.x_knots - x0) * (b - a) / (x1 - x0)
        ys = c + (self.y_knots - y0) * (d - c) / (y1 - y0)
        xs[0], xs[-1], ys[0], ys[-1] = a, b, c, d
        return MonotoneC1Map(xs, ys, self.kinds)


def padded_lengths(lengths: Sequence[float], target: float | None = None) -> np.ndarray:
    """Pad ``l_n`` to ``l_n + s 2^-n`` so the padded lengths sum to ``target``.

    ``target`` defaults to twice the total length.  Inputs are expected in
    non-increasing order, which the padding preserves.
    """
    l = np.asarray(lengths, dtype=float)
    if l.size == 0:
        raise ValueError("padded_lengths needs at least one length")
    if np.any(l < 0):
        raise ValueError("lengths must be nonnegative")
    if target is None:
        target = 2.0 * float(l.sum())
    weights = 2.0 ** -np.arange(1, l.size + 1, dtype=float)
    slack = target - l.sum()
    if slack < 0:
        raise ValueError("target smaller than the total length")
    out = l + slack / weights.sum() * weights
    # absorb rounding so the sum is exact to the last ulp we can control
    out[0] += target - out.sum()
    return out


def psi(S: Iterable[float] = ()) -> MonotoneC1Map:
    """Monotone C1 surjection of [0, 1] whose critical values are S with 0 and 1.

    The complement of S splits [0, 1] into intervals of lengths ``l_n``;
    ordered by decreasing length they receive padded lengths ``l'_n`` summing
    to 2.  Laying the padded intervals out in the original order along
    [0, 2] and filling each with a scaled bump gives a map [0, 2] -> [0, 1]
    with slopes at most 2; compressing the domain to [0, 1] doubles that,
    so sup |psi'| <= 4.
    """
    pts = np.unique(np.concatenate([[0.0, 1.0], np.asarray(list(S), dtype=float)]))
    if pts[0] < 0.0 or pts[-1] > 1.0:
        raise ValueError("S must lie in [0, 1]")
    gaps = np.diff(pts)
    order = np.argsort(-gaps, kind="stable")
    padded = np.empty_like(gaps)
    padded[order] = padded_lengths(gaps[order], 2.0)
    x_hat = np.concatenate([[0.0], np.cumsum(padded)])
    x_hat[-1] = 2.0
    return MonotoneC1Map(x_hat / 2.0, pts, ("bump",) * len(gaps))


def psi_scaled(J: tuple[float, float], S: Iterable[float] = ()) -> MonotoneC1Map:
    """:func:`psi` transported to the interval ``J`` (both domain and range)."""
    a, b = float(J[0]), float(J[1])
    if not b > a:
        raise ValueError("degenerate interval")
    S = np.asarray(list(S), dtype=float)
    if S.size and (S.min() < a or S.max() > b):
        raise ValueError("S must lie in J")
    base = psi((S - a) / (b - a))
    return base.conjugate(a, b, a, b)


def phi(fixed: Sequence[tuple[float, float]], branch_values: Iterable[float], L: float,
        reparam_empty: bool = False) -> MonotoneC1Map:
    """Map of [0, L] fixing the closed set ``fixed`` and flattening at branch values.

    ``fixed`` is a list of closed intervals (possibly single points).  On each
    complementary open interval the map is ``psi_scaled`` with the branch
    values it contains as critical values.  Complementary intervals without
    branch values are left as the identity unless ``reparam_empty`` is set.
    """
    if L <= 0:
        raise ValueError("L must be positive")
    ivs = sorted((max(0.0, float(a)), min(L, float(b))) for a, b in fixed)
    merged: list[list[float]] = []
    for a, b in ivs:
        if b < a:
            raise ValueError("fixed interval with b < a")
        if merged and a <= merged[-1][1]:
            merged[-1][1] = max(merged[-1][1], b)
        else:
            merged.append([a, b])
    bv = np.unique(np.asarray(list(branch_values), dtype=float))
    if bv.size and (bv.min() < 0 or bv.max() > L):
        raise ValueError("branch values outside [0, L]")

    # complementary open intervals, including the ends of [0, L]
    comps = []
    cursor = 0.0
    for a, b in merged:
        if a > cursor:
            comps.append((cursor, a))
        cursor = max(cursor, b)
    if cursor < L:
        comps.append((cursor, L))

    xs: list[float] = [0.0]
    kinds: list[str] = []

    def push_linear(upto):
        if upto > xs[-1]:
            xs.append(upto)
            kinds.append("linear")

    ys: list[float] = [0.0]
    for a, b in comps:
        inside = bv[(bv > a) & (bv < b)]
        if inside.size == 0 and not reparam_empty:
            continue
        push_linear(a)
        ys.extend([xs[-1]] * (len(xs) - len(ys)))
        piece = psi_scaled((a, b), inside)
        for xk, yk, kd in zip(piece.x_knots[1:], piece.y_knots[1:], piece.kinds):
            xs.append(float(xk))
            ys.append(float(yk))
            kinds.append(kd)
    push_linear(L)
    ys.extend([xs[-1]] * (len(xs) - len(ys)))
    # linear pieces are identity pieces: y knots equal x knots there
    return MonotoneC1Map(np.array(xs), np.array(ys), tuple(kinds))


def identity_map(a: float, b: float) -> MonotoneC1Map:
    return MonotoneC1Map(np.array([a, b]), np.array([a, b]), ("linear",))
