"""Self-overlap of a sampled curve: how many separate passes come near each sample."""
from __future__ import annotations

from dataclasses import dataclass

import numpy as np
from scipy.spatial import cKDTree


@dataclass(frozen=True)
class OverlapIndex:
    """Per-sample preimage clusters.

    ``clusters[i]`` lists the maximal runs ``(lo, hi)`` (inclusive) of
    consecutive sample indices whose points lie within ``eps`` of point i;
    ``multiplicity[i]`` is their number and ``own[i]`` the position of the run
    containing i itself.
    """

    eps: float
    multiplicity: np.ndarray
    clusters: tuple
    own: np.ndarray

    def partner_runs(self, i: int) -> list[tuple[int, int]]:
        return [c for k, c in enumerate(self.clusters[i]) if k != self.own[i]]


def _runs(idx: np.ndarray) -> tuple:
    if idx.size == 0:
        return ()
    breaks = np.nonzero(np.diff(idx) > 1)[0]
    starts = np.concatenate([[0], breaks + 1])
    ends = np.concatenate([breaks, [idx.size - 1]])
    return tuple((int(idx[a]), int(idx[b])) for a, b in zip(starts, ends))


def _build(neighbors, eps: float) -> OverlapIndex:
    clusters = []
    mult = np.empty(len(neighbors), dtype=int)
    own = np.empty(len(neighbors), dtype=int)
    for i, nb in enumerate(neighbors):
        runs = _runs(nb)
        clusters.append(runs)
        mult[i] = len(runs)
        own[i] = next(k for k, (lo, hi) in enumerate(runs) if lo <= i <= hi)
    return OverlapIndex(eps, mult, tuple(clusters), own)


def self_overlap_index(points, eps: float) -> OverlapIndex:
    """Spatially indexed neighbor search; result identical to :func:`self_overlap_bruteforce`."""
    p = np.asarray(points, dtype=float)
    tree = cKDTree(p)
    cand = tree.query_ball_point(p, r=eps * (1.0 + 1e-9) + 1e-300)
    neighbors = []
    for i, c in enumerate(cand):
        c = np.asarray(sorted(c), dtype=int)
        # final test with the same arithmetic as the brute-force oracle
        d = np.linalg.norm(p[c] - p[i], axis=1)
        neighbors.append(c[d <= eps])
    return _build(neighbors, eps)


def self_overlap_bruteforce(points, eps: float) -> OverlapIndex:
    """All-pairs O(N^2) reference."""
    p = np.asarray(points, dtype=float)
    neighbors = []
    for i in range(len(p)):
        d = np.linalg.norm(p - p[i], axis=1)
        neighbors.append(np.nonzero(d <= eps)[0])
    return _build(neighbors, eps)
