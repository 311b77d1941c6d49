"""Curve synthesis from arcs and a traversal."""
from __future__ import annotations

import numpy as np

from ..reparam import bump, bump_prime
from .curves import CurveError, CurveSpec, SampledCurve


def synth_curve(spec: CurveSpec, samples_per_unit: int = 512, halt: bool = True) -> SampledCurve:
    """Sample the traversal of ``spec`` on a uniform grid.

    Each traversal entry and each unit of dwell gets ``samples_per_unit``
    parameter intervals.  With ``halt`` every entry is run through the bump
    profile, so the speed vanishes at every junction; forward and backward
    passes over one arc then visit identical points.  With ``halt=False`` the
    bump is applied once to the whole traversal and the curve only stops at
    its two ends.
    """
    if samples_per_unit < 32:
        raise CurveError("samples_per_unit must be at least 32")
    spec.validate()
    n = int(samples_per_unit)
    if not spec.traversal:
        units = max(1, round(sum(spec.dwell or (0,)) * n))
        p = np.tile(np.asarray(spec.base, dtype=float), (units + 1, 1))
        return SampledCurve(np.linspace(0, 1, units + 1), p, np.zeros_like(p), ())
    if halt:
        return _synth_halting(spec, n)
    if spec.dwell is not None and any(spec.dwell):
        raise CurveError("dwell requires halting joins")
    return _synth_through(spec, n)


def _piece(spec: CurveSpec, k: int, u: np.ndarray):
    aid, d = spec.traversal[k]
    arc = spec.arcs[aid]
    L = arc.length
    # a backward pass visits exactly the forward sample points, reversed
    s = L * bump(u if d > 0 else u[::-1])
    pts, direc = arc.at(s)
    spd = L * bump_prime(u)
    return pts, d * direc * spd[:, None]


def _synth_halting(spec: CurveSpec, n: int) -> SampledCurve:
    dwell = spec.dwell or (0.0,) * (len(spec.traversal) + 1)
    u = np.linspace(0.0, 1.0, n + 1)
    pts_list, vel_list = [], []

    def add(p, v):
        if pts_list:
            p, v = p[1:], v[1:]
        pts_list.append(p)
        vel_list.append(v)

    for k in range(len(spec.traversal) + 1):
        m = round(dwell[k] * n)
        if m > 0:
            anchor = spec.endpoints(k)[0] if k < len(spec.traversal) else spec.endpoints(k - 1)[1]
            add(np.tile(anchor, (m + 1, 1)), np.zeros((m + 1, spec.dim)))
        if k < len(spec.traversal):
            add(*_piece(spec, k, u))
    pts = np.concatenate(pts_list)
    vel = np.concatenate(vel_list)
    N = len(pts) - 1
    # velocities above are per unit of local parameter; one unit spans n/N of [0, 1]
    vel = vel * (N / n)
    return SampledCurve(np.linspace(0.0, 1.0, N + 1), pts, vel, spec.traversal)


def _synth_through(spec: CurveSpec, n: int) -> SampledCurve:
    lengths = np.array([spec.arcs[a].length for a, _ in spec.traversal])
    cum = np.concatenate([[0.0], np.cumsum(lengths)])
    total = cum[-1]
    N = n * len(spec.traversal)
    t = np.linspace(0.0, 1.0, N + 1)
    S = total * bump(t)
    dS = total * bump_prime(t)
    k = np.clip(np.searchsorted(cum, S, side="right") - 1, 0, len(lengths) - 1)
    pts = np.zeros((N + 1, spec.dim))
    vel = np.zeros((N + 1, spec.dim))
    for j, (aid, d) in enumerate(spec.traversal):
        sel = k == j
        if not np.any(sel):
            continue
        arc = spec.arcs[aid]
        local = S[sel] - cum[j]
        s = local if d > 0 else arc.length - local
        p, direc = arc.at(s)
        pts[sel] = p
        vel[sel] = d * direc * dS[sel][:, None]
    return SampledCurve(t, pts, vel, spec.traversal)
