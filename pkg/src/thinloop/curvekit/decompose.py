"""Discrete multiplicity stratification of a sampled curve into embedded arcs.

Samples are split into three kinds: critical (speed below ``v_min``), near a
critical image (within ``eps_geo`` of a critical point's image), and
resolved.  Maximal runs of resolved samples with constant overlap
multiplicity become stratum intervals once they pass a minimum arclength;
everything else is the complement ``a0``.  Each gap between consecutive
intervals is then shrunk to its core -- the critical samples, or the single
sample closest to a critical image, a reversal or the gap middle -- and the
intervals are widened to meet the cores.  Intervals whose images coincide
are grouped into arcs by their overlap partners.
"""
from __future__ import annotations

from dataclasses import dataclass
from typing import Optional

import numpy as np
from scipy.spatial import cKDTree

from ..wordcore import Letter
from .curves import Arc, SampledCurve, arclength_table
from .overlap import OverlapIndex, self_overlap_index


class ResolutionError(RuntimeError):
    """Samples cannot be stratified at the requested geometric resolution."""


@dataclass(frozen=True)
class StratumInterval:
    """Open parameter interval (t[start], t[end]) traversing one arc.

    ``core`` is the resolved run (inclusive sample indices) the interval was
    grown from; multiplicity claims are only made on the core.
    """

    start: int
    end: int
    core: tuple
    multiplicity: int
    arc: str
    direction: int

    @property
    def letter(self) -> Letter:
        return Letter(self.arc, self.direction)


@dataclass(frozen=True)
class ArcDecomposition:
    curve: SampledCurve
    eps_geo: float
    v_min: float
    intervals: tuple
    a0: tuple  # (lo, hi) inclusive sample ranges, len(intervals) + 1 of them
    arcs: dict
    overlap: Optional[OverlapIndex] = None

    @property
    def strata(self) -> dict:
        out: dict[int, list] = {}
        t = self.curve.params
        for iv in self.intervals:
            out.setdefault(iv.multiplicity, []).append((float(t[iv.start]), float(t[iv.end])))
        return out

    @property
    def a0_params(self) -> list:
        t = self.curve.params
        return [(float(t[lo]), float(t[hi])) for lo, hi in self.a0]

    @property
    def letters(self) -> list:
        return [(iv.arc, iv.direction) for iv in self.intervals]

    @property
    def multiplicity(self) -> list:
        return [iv.multiplicity for iv in self.intervals]


def default_v_min(curve: SampledCurve, rel: float = 1e-3) -> float:
    return rel * float(np.max(curve.speed))


def _arc_names():
    k = 0
    while True:
        base = "abcdefghijklmnopqrstuvwxyz"
        yield base[k % 26] + ("" if k < 26 else str(k // 26))
        k += 1


class _UnionFind:
    def __init__(self, n):
        self.parent = list(range(n))

    def find(self, i):
        while self.parent[i] != i:
            self.parent[i] = self.parent[self.parent[i]]
            i = self.parent[i]
        return i

    def union(self, i, j):
        ri, rj = self.find(i), self.find(j)
        if ri != rj:
            self.parent[max(ri, rj)] = min(ri, rj)


def _directed_hausdorff(a: np.ndarray, b: np.ndarray) -> float:
    d, _ = cKDTree(b).query(a)
    return float(np.max(d))


def decompose(curve: SampledCurve, eps_geo: float = 0.01, v_min: Optional[float] = None,
              min_run: Optional[float] = None, hausdorff_tol: Optional[float] = None) -> ArcDecomposition:
    """Stratify ``curve`` by preimage multiplicity and recover its arcs.

    ``min_run`` (default ``3 eps_geo``) is the shortest arclength a resolved
    run needs to become a stratum interval; shorter runs (transversal
    crossings, the neighborhood of a turn) are absorbed into ``a0``.
    Matched intervals must agree as point sets within ``hausdorff_tol``
    (default ``2 eps_geo``, since their trimmed ends differ by up to eps).
    """
    if eps_geo <= 0:
        raise ValueError("eps_geo must be positive")
    pts = curve.points
    N = curve.n
    speed = curve.speed
    if v_min is None:
        v_min = default_v_min(curve)
    min_run = 3.0 * eps_geo if min_run is None else min_run
    hausdorff_tol = 2.0 * eps_geo if hausdorff_tol is None else hausdorff_tol

    step = np.linalg.norm(np.diff(pts, axis=0), axis=1)
    if np.max(step, initial=0.0) > eps_geo:
        raise ResolutionError("consecutive samples farther apart than eps_geo; sample more densely")
    s = arclength_table(curve)

    crit = speed < v_min
    if not np.any(speed >= v_min):
        return ArcDecomposition(curve, eps_geo, v_min, (), ((0, N),), {}, None)

    if np.any(crit):
        crit_tree = cKDTree(pts[crit])
        dist_crit, _ = crit_tree.query(pts)
    else:
        dist_crit = np.full(N + 1, np.inf)
    near_crit = (dist_crit <= eps_geo) & ~crit
    ov = self_overlap_index(pts, eps_geo)
    resolved = ~crit & ~near_crit

    # maximal runs of resolved samples with constant multiplicity
    runs = []
    i = 0
    while i <= N:
        if not resolved[i]:
            i += 1
            continue
        j = i
        while j + 1 <= N and resolved[j + 1] and ov.multiplicity[j + 1] == ov.multiplicity[i]:
            j += 1
        if s[j] - s[i] >= min_run:
            runs.append((i, j))
        i = j + 1

    if not runs:
        return ArcDecomposition(curve, eps_geo, v_min, (), ((0, N),), {}, ov)

    run_of = np.full(N + 1, -1)
    for r, (lo, hi) in enumerate(runs):
        run_of[lo:hi + 1] = r

    uf = _UnionFind(len(runs))
    for r, (lo, hi) in enumerate(runs):
        mid = (lo + hi) // 2
        for plo, phi in ov.partner_runs(mid):
            hits = run_of[plo:phi + 1]
            hits = hits[hits >= 0]
            if hits.size == 0:
                raise ResolutionError(
                    f"overlap partner of t={curve.params[mid]:.4f} lies in no resolved interval")
            if np.any(hits != hits[0]):
                raise ResolutionError(f"partner cluster of t={curve.params[mid]:.4f} spans two intervals")
            if hits[0] == r:
                raise ResolutionError(f"interval at t={curve.params[mid]:.4f} overlaps itself")
            uf.union(r, int(hits[0]))

    groups: dict[int, list[int]] = {}
    for r in range(len(runs)):
        groups.setdefault(uf.find(r), []).append(r)
    for members in groups.values():
        for r in members:
            lo, hi = runs[r]
            m = ov.multiplicity[(lo + hi) // 2]
            if m != len(members):
                raise ResolutionError(
                    f"multiplicity {m} at t={curve.params[(lo + hi) // 2]:.4f} but {len(members)} matching intervals")

    # gap cores
    bounds = [(-1, -1)] + runs + [(N + 1, N + 1)]
    cores = []
    chords = np.diff(pts, axis=0)
    for k in range(len(runs) + 1):
        glo = bounds[k][1] + 1
        ghi = bounds[k + 1][0] - 1
        if ghi < glo:
            # runs touch; cut at the first sample of the later run
            c = min(glo, N)
            cores.append((c, c))
            continue
        idx = np.arange(glo, ghi + 1)
        if np.any(crit[idx]):
            c_idx = idx[crit[idx]]
            lo, hi = int(c_idx[0]), int(c_idx[-1])
        elif np.any(near_crit[idx]):
            lo = hi = int(idx[np.argmin(dist_crit[idx])])
        else:
            inner = idx[(idx > 0) & (idx < N)]
            rev = [i for i in inner if chords[i - 1] @ chords[i] < 0]
            lo = hi = int(rev[0]) if rev else int(idx[len(idx) // 2])
        if k == 0:
            lo = 0
        if k == len(runs):
            hi = N
        cores.append((lo, hi))

    for k in range(len(runs)):
        if cores[k][1] >= cores[k + 1][0]:
            raise ResolutionError("interval collapsed between neighboring cores")

    # arcs: reference = earliest member of each group
    names = _arc_names()
    arc_of_group: dict[int, str] = {}
    arcs: dict[str, Arc] = {}
    intervals = []
    ref_core_pts: dict[str, np.ndarray] = {}
    for r, (lo, hi) in enumerate(runs):
        g = uf.find(r)
        start, end = cores[r][1], cores[r + 1][0]
        if g not in arc_of_group:
            aid = next(names)
            arc_of_group[g] = aid
            arcs[aid] = Arc(aid, pts[start:end + 1].copy())
            ref_core_pts[aid] = pts[lo:hi + 1]
            direction = 1
        else:
            aid = arc_of_group[g]
            ref = ref_core_pts[aid]
            mine = pts[lo:hi + 1]
            h = max(_directed_hausdorff(mine, ref), _directed_hausdorff(ref, mine))
            if h > hausdorff_tol:
                raise ResolutionError(
                    f"intervals matched to arc {aid} differ by Hausdorff distance {h:.3g} > {hausdorff_tol:.3g}")
            tree = cKDTree(ref)
            _, first = tree.query(mine[0])
            _, last = tree.query(mine[-1])
            if first == last:
                raise ResolutionError(f"cannot orient interval against arc {aid}")
            direction = 1 if last > first else -1
        intervals.append(StratumInterval(int(start), int(end), (int(lo), int(hi)),
                                         len(groups[g]), aid, direction))
    return ArcDecomposition(curve, eps_geo, v_min, tuple(intervals), tuple(cores), arcs, ov)


def word_of(decomp: ArcDecomposition) -> tuple:
    """Letters of the stratum intervals in parameter order."""
    return tuple(iv.letter for iv in decomp.intervals)


def check_invariants(decomp: ArcDecomposition) -> dict:
    """Evaluate the decomposition invariants; returns name -> bool."""
    curve = decomp.curve
    N = curve.n
    out = {}
    # disjoint cover
    covered = np.zeros(N + 1, dtype=int)
    for lo, hi in decomp.a0:
        covered[lo:hi + 1] += 1
    for iv in decomp.intervals:
        covered[iv.start + 1:iv.end] += 1
    out["cover"] = bool(np.all(covered == 1))
    # speed threshold on interval cores and in a0 core interiors
    sp = curve.speed
    out["speed_strata"] = all(np.all(sp[iv.core[0]:iv.core[1] + 1] >= decomp.v_min) for iv in decomp.intervals)
    out["speed_a0"] = all(
        hi - lo < 2 or np.all(sp[lo + 1:hi] < decomp.v_min) or _dwell_like(curve, lo, hi, decomp.eps_geo)
        for lo, hi in decomp.a0)
    # multiplicity on cores
    ov = decomp.overlap
    if ov is not None:
        out["multiplicity"] = all(
            np.all(ov.multiplicity[iv.core[0]:iv.core[1] + 1] == iv.multiplicity) for iv in decomp.intervals)
        # partners of a stratum-n core stay inside stratum-n intervals
        owner = np.full(N + 1, -1)
        for k, iv in enumerate(decomp.intervals):
            owner[iv.start + 1:iv.end] = k
        ok = True
        for iv in decomp.intervals:
            mid = (iv.core[0] + iv.core[1]) // 2
            for plo, phi in ov.partner_runs(mid):
                hits = owner[plo:phi + 1]
                hits = hits[hits >= 0]
                if hits.size == 0 or decomp.intervals[hits[0]].multiplicity != iv.multiplicity:
                    ok = False
        out["partners_same_stratum"] = ok
    # equal images for intervals on one arc
    ok = True
    by_arc: dict[str, list] = {}
    for iv in decomp.intervals:
        by_arc.setdefault(iv.arc, []).append(iv)
    for ivs in by_arc.values():
        ref = curve.points[ivs[0].core[0]:ivs[0].core[1] + 1]
        for iv in ivs[1:]:
            mine = curve.points[iv.core[0]:iv.core[1] + 1]
            h = max(_directed_hausdorff(mine, ref), _directed_hausdorff(ref, mine))
            ok &= h <= 2 * decomp.eps_geo
    out["arc_images"] = bool(ok)
    return out


def _dwell_like(curve, lo, hi, eps) -> bool:
    return bool(np.max(np.linalg.norm(curve.points[lo:hi + 1] - curve.points[lo], axis=1)) <= eps)
