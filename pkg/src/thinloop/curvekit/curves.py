"""Sampled curves, arcs and curve specifications."""
from __future__ import annotations

from dataclasses import dataclass
from functools import cached_property
from typing import Optional

import numpy as np


class CurveError(ValueError):
    """Invalid curve input (mismatched junctions, missing arcs, bad samples)."""


@dataclass(frozen=True)
class SampledCurve:
    """A C1 curve on [0, 1] given by samples on a parameter grid.

    ``word`` optionally carries the ground-truth traversal of a synthesized
    curve as ``(arc id, direction)`` pairs.
    """

    params: np.ndarray
    points: np.ndarray
    tangents: np.ndarray
    word: Optional[tuple] = None

    def __post_init__(self):
        t = np.asarray(self.params, dtype=float)
        p = np.asarray(self.points, dtype=float)
        v = np.asarray(self.tangents, dtype=float)
        if p.ndim == 1:
            p = p[:, None]
        if v.ndim == 1:
            v = v[:, None]
        object.__setattr__(self, "params", t)
        object.__setattr__(self, "points", p)
        object.__setattr__(self, "tangents", v)
        if t.ndim != 1 or len(t) < 2:
            raise CurveError("need at least two samples")
        if p.shape[0] != len(t) or v.shape != p.shape:
            raise CurveError("params, points and tangents must have matching lengths")
        if np.any(np.diff(t) <= 0):
            raise CurveError("params must be strictly increasing")
        if abs(t[0]) > 1e-12 or abs(t[-1] - 1.0) > 1e-12:
            raise CurveError("params must run from 0 to 1")

    @classmethod
    def from_points(cls, points, params=None, word=None) -> "SampledCurve":
        """Build a curve with finite-difference tangents."""
        p = np.asarray(points, dtype=float)
        if p.ndim == 1:
            p = p[:, None]
        t = np.linspace(0.0, 1.0, len(p)) if params is None else np.asarray(params, dtype=float)
        v = np.gradient(p, t, axis=0)
        return cls(t, p, v, word)

    def evaluate(self, t) -> tuple[np.ndarray, np.ndarray]:
        """Point and velocity of the cubic Hermite interpolant at parameters ``t``."""
        t = np.clip(np.asarray(t, dtype=float), 0.0, 1.0)
        k = np.clip(np.searchsorted(self.params, t, side="right") - 1, 0, len(self.params) - 2)
        h = (self.params[k + 1] - self.params[k])[..., None]
        x = ((t - self.params[k]))[..., None] / h
        p0, p1 = self.points[k], self.points[k + 1]
        v0, v1 = self.tangents[k] * h, self.tangents[k + 1] * h
        x2, x3 = x * x, x * x * x
        pts = (2 * x3 - 3 * x2 + 1) * p0 + (x3 - 2 * x2 + x) * v0 + (3 * x2 - 2 * x3) * p1 + (x3 - x2) * v1
        vel = ((6 * x2 - 6 * x) * p0 + (3 * x2 - 4 * x + 1) * v0 + (6 * x - 6 * x2) * p1
               + (3 * x2 - 2 * x) * v1) / h
        return pts, vel

    @property
    def dim(self) -> int:
        return self.points.shape[1]

    @property
    def n(self) -> int:
        """Number of parameter intervals N (samples are N + 1)."""
        return len(self.params) - 1

    @property
    def speed(self) -> np.ndarray:
        return np.linalg.norm(self.tangents, axis=1)

    def is_loop(self, tol: float = 0.0) -> bool:
        return bool(np.linalg.norm(self.points[0] - self.points[-1]) <= tol)

    def c1_modulus(self) -> float:
        """max_i |tangent_{i+1} - tangent_i| / dt_i."""
        dv = np.linalg.norm(np.diff(self.tangents, axis=0), axis=1)
        return float(np.max(dv / np.diff(self.params)))

    def length(self) -> float:
        return float(np.sum(np.linalg.norm(np.diff(self.points, axis=0), axis=1)))


@dataclass(frozen=True)
class Arc:
    id: str
    points: np.ndarray

    def __post_init__(self):
        p = np.asarray(self.points, dtype=float)
        if p.ndim != 2 or len(p) < 2:
            raise CurveError(f"arc {self.id!r} needs at least two points")
        object.__setattr__(self, "points", p)

    @cached_property
    def cumulative(self) -> np.ndarray:
        seg = np.linalg.norm(np.diff(self.points, axis=0), axis=1)
        return np.concatenate([[0.0], np.cumsum(seg)])

    @property
    def length(self) -> float:
        return float(self.cumulative[-1])

    @property
    def start(self) -> np.ndarray:
        return self.points[0]

    @property
    def end(self) -> np.ndarray:
        return self.points[-1]

    def at(self, s):
        """Point(s) at arclength ``s`` from the start, and unit direction there."""
        cum = self.cumulative
        s = np.clip(np.asarray(s, dtype=float), 0.0, cum[-1])
        pts = np.stack([np.interp(s, cum, self.points[:, k]) for k in range(self.points.shape[1])], axis=-1)
        seg = np.clip(np.searchsorted(cum, s, side="right") - 1, 0, len(cum) - 2)
        d = np.diff(self.points, axis=0)
        norms = np.linalg.norm(d, axis=1)
        norms[norms == 0] = 1.0
        return pts, (d / norms[:, None])[seg]

    def injectivity_defect(self, eps: float) -> Optional[tuple[int, int]]:
        """First pair of vertices closer than ``eps`` although far apart along the arc.

        Returns None for an embedded arc.  Separation along the arc must exceed
        ``3 eps`` for a pair to count; a closed arc (start == end) measures it
        cyclically, so touching at the endpoints is allowed.
        """
        p = self.points
        cum = self.cumulative
        L = cum[-1]
        closed = np.linalg.norm(p[0] - p[-1]) <= eps
        d = np.linalg.norm(p[:, None, :] - p[None, :, :], axis=-1)
        sep = np.abs(cum[:, None] - cum[None, :])
        if closed:
            sep = np.minimum(sep, L - sep)
        bad = np.argwhere((d < eps) & (sep > 3 * eps))
        if len(bad):
            i, j = bad[0]
            return int(i), int(j)
        return None


@dataclass(frozen=True)
class CurveSpec:
    """Synthesis input: arcs, a traversal of them, and optional pauses.

    ``dwell[k]`` is the pause (in traversal units) before traversal entry k;
    ``dwell[len(traversal)]`` the pause at the end.  ``base`` locates the
    constant curve of an empty traversal.
    """

    arcs: dict
    traversal: tuple
    dwell: Optional[tuple] = None
    base: Optional[tuple] = None

    def __post_init__(self):
        arcs = dict(self.arcs)
        for k, a in list(arcs.items()):
            if not isinstance(a, Arc):
                arcs[k] = Arc(k, a)
        object.__setattr__(self, "arcs", arcs)
        object.__setattr__(self, "traversal", tuple((str(a), int(d)) for a, d in self.traversal))
        if self.dwell is not None:
            object.__setattr__(self, "dwell", tuple(float(x) for x in self.dwell))

    @property
    def dim(self) -> int:
        if self.arcs:
            return next(iter(self.arcs.values())).points.shape[1]
        return len(self.base) if self.base is not None else 2

    def endpoints(self, k: int) -> tuple[np.ndarray, np.ndarray]:
        aid, d = self.traversal[k]
        arc = self.arcs[aid]
        return (arc.start, arc.end) if d > 0 else (arc.end, arc.start)

    def validate(self, eps: float = 1e-9) -> None:
        for aid, d in self.traversal:
            if aid not in self.arcs:
                raise CurveError(f"traversal references missing arc {aid!r}")
            if d not in (1, -1):
                raise CurveError("directions must be +1 or -1")
        for k in range(len(self.traversal) - 1):
            _, end = self.endpoints(k)
            start, _ = self.endpoints(k + 1)
            if np.linalg.norm(end - start) > eps:
                raise CurveError(f"junction mismatch between traversal entries {k} and {k + 1}")
        if self.dwell is not None:
            if len(self.dwell) != len(self.traversal) + 1 or min(self.dwell, default=0) < 0:
                raise CurveError("dwell needs len(traversal) + 1 nonnegative entries")
        if not self.traversal and self.base is None:
            raise CurveError("empty traversal needs a base point")

    def word(self) -> tuple:
        return self.traversal


# ---------------------------------------------------------------------------
# arclength and elementary operations

def arclength_table(curve: SampledCurve, method: str = "chord") -> np.ndarray:
    """Cumulative arclength l(t_i).

    ``"chord"`` sums polyline segment lengths (so l(1) is exactly the polyline
    length); ``"trapezoid"`` integrates the tangent norm.
    """
    if method == "chord":
        seg = np.linalg.norm(np.diff(curve.points, axis=0), axis=1)
    elif method == "trapezoid":
        sp = curve.speed
        seg = 0.5 * (sp[1:] + sp[:-1]) * np.diff(curve.params)
    else:
        raise ValueError(f"unknown method {method!r}")
    return np.concatenate([[0.0], np.cumsum(seg)])


class ArclengthParam:
    """The curve as a function of arclength.

    ``method="hermite"`` (default) interpolates each chord by the cubic
    Hermite segment through its end samples with the unit tangents as
    slopes, so off-sample points follow the C1 curve rather than its
    polyline; ``"linear"`` walks the polyline.  Both pass through every
    sample.  Where a tangent is missing or points against the chord (a turn
    or a pause) the chord direction is used instead.
    """

    def __init__(self, curve: SampledCurve, method: str = "hermite"):
        if method not in ("hermite", "linear"):
            raise ValueError(f"unknown method {method!r}")
        self.curve = curve
        self.method = method
        self.s = arclength_table(curve)
        self.L = float(self.s[-1])
        # distinct knots for interpolation (dwell samples collapse)
        keep = np.concatenate([[True], np.diff(self.s) > 0])
        self._s = self.s[keep]
        self._p = curve.points[keep]
        if len(self._s) > 1:
            chord = np.diff(self._p, axis=0)
            chord /= np.linalg.norm(chord, axis=1, keepdims=True)
            tan = curve.tangents[keep]
            norm = np.linalg.norm(tan, axis=1, keepdims=True)
            unit = np.divide(tan, norm, out=np.zeros_like(tan), where=norm > 0)
            m0 = unit[:-1].copy()
            m1 = unit[1:].copy()
            bad0 = (norm[:-1, 0] <= 1e-9 * norm.max()) | (np.sum(m0 * chord, axis=1) <= 0)
            bad1 = (norm[1:, 0] <= 1e-9 * norm.max()) | (np.sum(m1 * chord, axis=1) <= 0)
            m0[bad0] = chord[bad0]
            m1[bad1] = chord[bad1]
            self._m0, self._m1 = m0, m1

    def __call__(self, s):
        s = np.clip(np.asarray(s, dtype=float), 0.0, self.L)
        if len(self._s) == 1:
            return np.broadcast_to(self._p[0], s.shape + (self._p.shape[1],)).copy()
        if self.method == "linear":
            return np.stack([np.interp(s, self._s, self._p[:, k]) for k in range(self._p.shape[1])], axis=-1)
        k = np.clip(np.searchsorted(self._s, s, side="right") - 1, 0, len(self._s) - 2)
        h = self._s[k + 1] - self._s[k]
        x = ((s - self._s[k]) / h)[..., None]
        x2, x3 = x * x, x * x * x
        h00 = 2 * x3 - 3 * x2 + 1
        h10 = x3 - 2 * x2 + x
        h01 = -2 * x3 + 3 * x2
        h11 = x3 - x2
        hh = h[..., None]
        return (h00 * self._p[k] + h10 * hh * self._m0[k] + h01 * self._p[k + 1]
                + h11 * hh * self._m1[k])

    def at_param(self, t):
        """l(t) for arbitrary parameters by linear interpolation of the table."""
        return np.interp(t, self.curve.params, self.s)


def reverse(curve: SampledCurve) -> SampledCurve:
    t = 1.0 - curve.params[::-1]
    t[0], t[-1] = 0.0, 1.0
    word = None
    if curve.word is not None:
        word = tuple((a, -d) for a, d in reversed(curve.word))
    return SampledCurve(t, curve.points[::-1].copy(), -curve.tangents[::-1], word)


def concat(c1: SampledCurve, c2: SampledCurve, tol: float = 1e-9, tangent_tol: float = 1e-6) -> SampledCurve:
    """Product path: c1 on [0, 1/2], c2 on [1/2, 1], tangents rescaled by 2."""
    if np.linalg.norm(c1.points[-1] - c2.points[0]) > tol:
        raise CurveError("concat: end of first curve differs from start of second")
    if np.linalg.norm(c1.tangents[-1]) > tangent_tol or np.linalg.norm(c2.tangents[0]) > tangent_tol:
        raise CurveError("concat: tangents must vanish at the joined endpoints")
    t = np.concatenate([0.5 * c1.params, 0.5 + 0.5 * c2.params[1:]])
    p = np.concatenate([c1.points, c2.points[1:]])
    v = np.concatenate([2.0 * c1.tangents, 2.0 * c2.tangents[1:]])
    v[len(c1.params) - 1] = 0.0
    word = None
    if c1.word is not None and c2.word is not None:
        word = tuple(c1.word) + tuple(c2.word)
    return SampledCurve(t, p, v, word)


def constant_curve(point, n: int = 64) -> SampledCurve:
    p = np.tile(np.asarray(point, dtype=float), (n + 1, 1))
    return SampledCurve(np.linspace(0, 1, n + 1), p, np.zeros_like(p), ())


def resample(curve: SampledCurve, t_new) -> SampledCurve:
    """Evaluate the polyline at new parameters (tangents by finite differences)."""
    t_new = np.asarray(t_new, dtype=float)
    pts = np.stack([np.interp(t_new, curve.params, curve.points[:, k]) for k in range(curve.dim)], axis=-1)
    return SampledCurve.from_points(pts, t_new, curve.word)


def compose(curve: SampledCurve, reparam, n: Optional[int] = None) -> SampledCurve:
    """gamma o psi on a uniform grid, psi a monotone map of [0, 1].

    Points come from the Hermite interpolant.  When ``reparam`` has a
    ``derivative`` method the tangents follow the chain rule, otherwise
    finite differences are used.
    """
    n = curve.n if n is None else n
    t = np.linspace(0.0, 1.0, n + 1)
    s = np.clip(np.asarray(reparam(t), dtype=float), 0.0, 1.0)
    pts, vel = curve.evaluate(s)
    if hasattr(reparam, "derivative"):
        return SampledCurve(t, pts, vel * np.asarray(reparam.derivative(t), dtype=float)[:, None], curve.word)
    return SampledCurve.from_points(pts, t, curve.word)
