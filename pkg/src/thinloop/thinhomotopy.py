"""Explicit thin homotopies on (t, r) grids and a discrete thinness check.

Three constructions, each evaluated exactly in t on the curve's own sample
grid and halted at both ends of the r axis by the bump profile:

* :func:`vanish_at_vertices` slides the curve along itself,
  ``H(t, r) = curve_at_arclength((1 - r) l(t) + r phi(l(t)))``, so the new
  curve stops at every sample mapped to a tree vertex;
* :func:`contract_tree` retracts a whisker through its tree to the root,
  stopping each moving point whenever it passes a vertex;
* :func:`remove_whiskers` runs both on every maximal whisker block at once
  and ends at a curve whose word is the reduced word.
"""
from __future__ import annotations

from dataclasses import dataclass, field
from typing import Callable, Optional

import numpy as np
from scipy.spatial import cKDTree

from .curvekit.curves import ArclengthParam, SampledCurve, arclength_table
from .curvekit.decompose import ArcDecomposition, decompose, word_of
from .reparam import MonotoneC1Map, bump, padded_lengths, phi
from .treefactor import Factorization, FactorTree, NotWhiskerError, factorize
from .wordcore import reduce, reduction_survivors


@dataclass(frozen=True)
class HomotopyGrid:
    """``H[i, j]`` is the point at ``(t[i], r[j])``; ``r`` runs over [0, 1]."""

    t: np.ndarray
    r: np.ndarray
    H: np.ndarray
    tag: str = ""

    def __post_init__(self):
        if self.H.shape[:2] != (len(self.t), len(self.r)):
            raise ValueError("grid shape does not match its axes")
        if len(self.t) < 4 or len(self.r) < 4:
            raise ValueError("degenerate grid: need at least 4 samples per axis")

    @property
    def source(self) -> np.ndarray:
        return self.H[:, 0]

    @property
    def target(self) -> np.ndarray:
        return self.H[:, -1]

    def then(self, other: "HomotopyGrid", tag: str = "") -> "HomotopyGrid":
        """Run ``self`` on r in [0, 1/2] and ``other`` on [1/2, 1]."""
        if len(self.t) != len(other.t) or not np.allclose(self.t, other.t):
            raise ValueError("grids have different t axes")
        if np.max(np.abs(self.target - other.source)) > 1e-12:
            raise ValueError("grids do not meet")
        r = np.concatenate([0.5 * self.r, 0.5 + 0.5 * other.r[1:]])
        H = np.concatenate([self.H, other.H[:, 1:]], axis=1)
        return HomotopyGrid(self.t, r, H, tag or f"{self.tag}+{other.tag}")


@dataclass(frozen=True)
class ThinnessReport:
    max_minor: float
    max_edge_partial: float
    c1_increment: float
    c1_ratio: float
    containment: float
    boundary_exact: bool
    tol_rank: float
    tol_edge: float
    tol_c1: float
    tol_image: float
    edge_partials: dict = field(default_factory=dict)

    @property
    def passed(self) -> bool:
        return (self.max_minor <= self.tol_rank and self.max_edge_partial <= self.tol_edge
                and self.c1_ratio <= self.tol_c1 and self.containment <= self.tol_image
                and self.boundary_exact)

    def summary(self) -> str:
        verdict = "pass" if self.passed else "FAIL"
        return (f"thinness {verdict}: minor {self.max_minor:.3g} (tol {self.tol_rank:g}), "
                f"edge partial {self.max_edge_partial:.3g} (tol {self.tol_edge:g}), "
                f"C1 increment {self.c1_increment:.3g} (ratio {self.c1_ratio:.3g}), "
                f"image distance {self.containment:.3g}, boundary exact {self.boundary_exact}")


def _one_sided_weights(x: np.ndarray) -> np.ndarray:
    """Weights w with sum w_k f(x_k) = f'(x_0) for cubics, for four nodes."""
    x = np.asarray(x, dtype=float) - x[0]
    V = np.vander(x, 4, increasing=True).T
    rhs = np.array([0.0, 1.0, 0.0, 0.0])
    return np.linalg.solve(V, rhs)


def _edge_derivative(F: np.ndarray, x: np.ndarray, axis: int, end: int) -> np.ndarray:
    """One-sided derivative of F along ``axis`` at the first (end=0) or last (end=-1) node."""
    if end == 0:
        idx = [0, 1, 2, 3]
    else:
        idx = [-1, -2, -3, -4]
    w = _one_sided_weights(x[idx])
    sl = np.take(F, idx, axis=axis)
    return np.tensordot(w, np.moveaxis(sl, axis, 0), axes=1)


def partial(F: np.ndarray, x: np.ndarray, axis: int) -> np.ndarray:
    """Finite-difference derivative along ``axis``.

    Fourth-order central differences on a uniform axis (second order next
    to the ends), ``np.gradient`` otherwise.
    """
    dx = np.diff(x)
    if len(x) < 5 or np.max(np.abs(dx - dx.mean())) > 1e-9 * abs(dx.mean()):
        return np.gradient(F, x, axis=axis, edge_order=2)
    h = float(dx.mean())
    G = np.gradient(F, h, axis=axis, edge_order=2)
    Fm = np.moveaxis(F, axis, 0)
    Gm = np.moveaxis(G, axis, 0)
    Gm[2:-2] = (-Fm[4:] + 8 * Fm[3:-1] - 8 * Fm[1:-3] + Fm[:-4]) / (12 * h)
    return G


def check_thin(grid: HomotopyGrid, tol_rank: float = 1e-3, tol_edge: float = 1e-6,
               source_points: Optional[np.ndarray] = None, tol_image: float = np.inf,
               tol_c1: float = 0.75) -> ThinnessReport:
    """Finite-difference certificate that ``grid`` is a thin homotopy.

    Minors of [dH/dt, dH/dr] are taken relative to ``max|dH/dt| max|dH/dr|``.
    Edge partials use a four-node one-sided stencil (exact on cubics).  The
    C1 test compares the largest change of either partial between
    neighbouring grid points with the same quantity on the grid coarsened by
    two: the ratio is about 1/2 for continuous partials and near 1 across a
    jump.  When ``source_points`` is given, every grid point must lie within
    ``tol_image`` of those samples.
    """
    t, r, H = grid.t, grid.r, grid.H
    n = len(t)
    # rows are processed in chunks (with a stencil halo) to bound memory
    size = max(2, 2 * (max(1, 2_000_000 // max(1, H.shape[1] * H.shape[2])) // 2))
    nt_max = nr_max = wedge_max = 0.0
    inc = {(k, s): [0.0, 0.0] for k in ("t", "r") for s in (1, 2)}
    mx = {(k, s): 0.0 for k in ("t", "r") for s in (1, 2)}
    last = {}
    for a in range(0, n, size):
        b = min(a + size, n)
        lo, hi = max(a - 2, 0), min(b + 2, n)
        Ht = partial(H[lo:hi], t[lo:hi], 0)[a - lo:b - lo]
        Hr = partial(H[a:b], r, 1)
        nt = np.linalg.norm(Ht, axis=-1)
        nr = np.linalg.norm(Hr, axis=-1)
        nt_max = max(nt_max, float(nt.max()))
        nr_max = max(nr_max, float(nr.max()))
        dots = np.einsum("ijk,ijk->ij", Ht, Hr)
        wedge_max = max(wedge_max, float(np.maximum(nt ** 2 * nr ** 2 - dots ** 2, 0.0).max()))
        for key, P in (("t", Ht), ("r", Hr)):
            for s in (1, 2):
                Ps = P[::s, ::s]  # a is even, so these are the globally even rows
                mx[key, s] = max(mx[key, s], float(np.linalg.norm(Ps, axis=-1).max()))
                prev = last.get((key, s))
                rows = Ps if prev is None else np.concatenate([prev[None], Ps])
                inc[key, s][0] = max(inc[key, s][0], np.linalg.norm(np.diff(rows, axis=0), axis=-1).max(initial=0.0))
                inc[key, s][1] = max(inc[key, s][1], np.linalg.norm(np.diff(Ps, axis=1), axis=-1).max(initial=0.0))
                last[key, s] = Ps[-1]
        del Ht, Hr, nt, nr, dots

    # sweeps below this are rounding noise, not motion
    floor = 1e-9 * (1.0 + max(nt_max, nr_max))
    swept = nt_max > floor and nr_max > floor
    max_minor = float(np.sqrt(wedge_max) / (nt_max * nr_max)) if swept else 0.0

    edges = {
        "dH/dr at r=0": _edge_derivative(H, r, 1, 0),
        "dH/dr at r=1": _edge_derivative(H, r, 1, -1),
        "dH/dt at t=0": _edge_derivative(H, t, 0, 0),
        "dH/dt at t=1": _edge_derivative(H, t, 0, -1),
    }
    edge_max = {k: float(np.max(np.linalg.norm(v, axis=-1))) for k, v in edges.items()}

    def increment(s):
        vals = [max(inc[k, s]) / mx[k, s] for k in ("t", "r") if mx[k, s] > floor]
        return float(max(vals, default=0.0))

    fine = increment(1)
    coarse = increment(2)
    ratio = fine / coarse if coarse > 0 else 0.0

    boundary = bool(np.all(H[0] == H[0, 0]) and np.all(H[-1] == H[-1, 0]))
    containment = 0.0
    if source_points is not None:
        tree = cKDTree(source_points)
        for a in range(0, n, size):
            d, _ = tree.query(H[a:a + size].reshape(-1, H.shape[-1]))
            containment = max(containment, float(d.max()))
    return ThinnessReport(max_minor, max(edge_max.values()), fine, ratio, containment, boundary,
                          tol_rank, tol_edge, tol_c1, tol_image, edge_max)


# ---------------------------------------------------------------------------
# halting in r

Sweep = Callable[[np.ndarray], np.ndarray]  # r values in [0, R] -> (n_t, len(r), d)


def _halted(sweep: Sweep, R: float, t: np.ndarray, n_r: int, tag: str, halt: bool = True) -> HomotopyGrid:
    u = np.linspace(0.0, 1.0, n_r + 1)
    rr = R * (bump(u) if halt else ramp(u))
    rr[-1] = R
    return HomotopyGrid(t, u, sweep(rr), tag)


def ramp(u: np.ndarray, width: float = 0.1) -> np.ndarray:
    """Monotone map of [0, 1] onto itself: linear in the middle, flat at both ends."""
    u = np.asarray(u, dtype=float)
    a = np.clip(u / width, 0.0, 1.0)
    b = np.clip((1.0 - u) / width, 0.0, 1.0)
    # integral of the slope profile sin^2 on the ramps and 1 between them
    left = width * (a / 2 - np.sin(np.pi * a) / (2 * np.pi))
    right = width * (b / 2 - np.sin(np.pi * b) / (2 * np.pi))
    total = 1.0 - width
    return np.where(u <= width, left, np.where(u >= 1 - width, total - right, width / 2 + (u - width))) / total


def glue_and_halt(grid: HomotopyGrid) -> HomotopyGrid:
    """Re-time the r axis by the bump profile (linear interpolation between columns)."""
    u = grid.r
    target = bump((u - u[0]) / (u[-1] - u[0])) * (u[-1] - u[0]) + u[0]
    j = np.clip(np.searchsorted(u, target, side="right") - 1, 0, len(u) - 2)
    w = ((target - u[j]) / (u[j + 1] - u[j]))[None, :, None]
    H = (1 - w) * grid.H[:, j] + w * grid.H[:, j + 1]
    H[:, 0], H[:, -1] = grid.H[:, 0], grid.H[:, -1]
    return HomotopyGrid(grid.t, grid.r, H, grid.tag + "+halted")


def constant_grid(curve: SampledCurve, n_r: int = 256, tag: str = "constant") -> HomotopyGrid:
    H = np.repeat(curve.points[:, None, :], n_r + 1, axis=1)
    return HomotopyGrid(curve.params, np.linspace(0, 1, n_r + 1), H, tag)


def _pin_edges(grid: HomotopyGrid, source: np.ndarray) -> None:
    # the constructions fix these exactly; remove rounding from the lookups
    grid.H[:, 0] = source
    grid.H[0, :] = source[0]
    grid.H[-1, :] = source[-1]


def _residual_weight(rr: np.ndarray, total: float) -> np.ndarray:
    """1 at r = 0 falling to 0 at r = total with zero slope at both ends."""
    return 1.0 - bump(np.clip(rr / total, 0.0, 1.0))


# ---------------------------------------------------------------------------
# stopping at vertices

def _critical_arclength_intervals(decomp: ArcDecomposition, s: np.ndarray) -> list[tuple[float, float]]:
    crit = decomp.curve.speed < decomp.v_min
    out = []
    i = 0
    n = len(crit)
    while i < n:
        if crit[i]:
            j = i
            while j + 1 < n and crit[j + 1]:
                j += 1
            out.append((float(s[i]), float(s[j])))
            i = j + 1
        else:
            i += 1
    return out


@dataclass(frozen=True)
class VertexStop:
    """Result of :func:`vanish_at_vertices`: the grid, the new curve and its arclength map."""

    grid: HomotopyGrid
    curve: SampledCurve
    phi: MonotoneC1Map
    sigma: np.ndarray  # phi(l(t_i)): where each new sample sits along the old curve


def _vertex_stop(decomp: ArcDecomposition, branch_values, n_r: int, tag: str) -> VertexStop:
    curve = decomp.curve
    s = arclength_table(curve)
    L = float(s[-1])
    gh = ArclengthParam(curve)
    if L == 0:
        grid = constant_grid(curve, n_r, tag)
        return VertexStop(grid, curve, None, s.copy())
    fixed = _critical_arclength_intervals(decomp, s)
    ph = phi(fixed, branch_values, L)
    target_s = np.clip(ph(s), 0.0, L)

    def sweep(rr):
        rho = (1.0 - rr)[None, :] * s[:, None] + rr[None, :] * target_s[:, None]
        return gh(rho)

    grid = _halted(sweep, 1.0, curve.params, n_r, tag)
    _pin_edges(grid, curve.points)
    # tangent of the new curve: unit chord direction x phi' x |gamma'|
    seg = np.clip(np.searchsorted(gh._s, target_s, side="right") - 1, 0, max(len(gh._s) - 2, 0))
    if len(gh._s) > 1:
        d = np.diff(gh._p, axis=0)
        d = d / np.linalg.norm(d, axis=1, keepdims=True)
        tang = d[seg] * (ph.derivative(s) * curve.speed)[:, None]
    else:
        tang = np.zeros_like(curve.points)
    grid.H[:, -1] = gh(target_s)
    new = SampledCurve(curve.params, grid.H[:, -1].copy(), tang, curve.word)
    return VertexStop(grid, new, ph, target_s)


def vanish_at_vertices(decomp: ArcDecomposition, fact: Optional[Factorization] = None,
                       n_r: int = 256) -> VertexStop:
    """Slide a whisker along itself until it halts at every vertex preimage.

    Branch values are the arclengths of all gap cores of the factorization
    (every sample that ``gamma_tilde`` sends to a vertex).
    """
    if fact is None:
        fact = factorize(decomp)
    s = arclength_table(decomp.curve)
    bv = [s[decomp.a0[k][0]] for k in fact.nesting.gap_region]
    return _vertex_stop(decomp, bv, n_r, "vanish_at_vertices")


# ---------------------------------------------------------------------------
# tree positions along arclength

def _chain(tree: FactorTree, edge: int) -> list[int]:
    return [] if edge < 0 else tree.ancestors(tree.edges[edge].parent) + [edge]


def _geodesic_point(tree: FactorTree, x: tuple, y: tuple, w: float) -> tuple[int, float]:
    """The point a fraction ``w`` of the way from x to y along the tree geodesic."""
    (ex, ox), (ey, oy) = x, y
    if ex == ey:
        return ex, ox + w * (oy - ox)
    cx, cy = _chain(tree, ex), _chain(tree, ey)
    n = 0
    while n < min(len(cx), len(cy)) and cx[n] == cy[n]:
        n += 1
    # pieces: (edge, from offset, to offset)
    pieces = []
    if ex >= 0 and ex in cy:
        pieces.append((ex, ox, tree.edges[ex].length))
    else:
        for k in reversed(cx[n:]):
            pieces.append((k, ox if k == ex else tree.edges[k].length, 0.0))
    if ey >= 0 and ey in cx:
        pieces.append((ey, tree.edges[ey].length, oy))
    else:
        for k in cy[n:]:
            pieces.append((k, 0.0, oy if k == ey else tree.edges[k].length))
    total = sum(abs(b - a) for _, a, b in pieces)
    if total == 0:
        return ex, ox
    left = w * total
    for k, a, b in pieces:
        d = abs(b - a)
        if left <= d:
            return k, a + np.sign(b - a) * left
        left -= d
    k, _, b = pieces[-1]
    return k, b


def tree_positions(fact: Factorization, s_query: np.ndarray) -> tuple[np.ndarray, np.ndarray]:
    """gamma_tilde as a function of arclength along the factored curve."""
    lo, hi = fact.samples
    s = arclength_table(fact.curve)[lo:hi + 1]
    q = np.asarray(s_query, dtype=float)
    idx = np.clip(np.searchsorted(s, q, side="right") - 1, 0, len(s) - 1)
    e_out = np.empty(q.shape, dtype=int)
    o_out = np.empty(q.shape)
    for n, (i, x) in enumerate(zip(idx, q)):
        if i == len(s) - 1 or s[i + 1] == s[i]:
            e_out[n], o_out[n] = fact.edge[i], fact.offset[i]
            continue
        w = float(np.clip((x - s[i]) / (s[i + 1] - s[i]), 0.0, 1.0))
        e_out[n], o_out[n] = _geodesic_point(fact.tree, (int(fact.edge[i]), float(fact.offset[i])),
                                             (int(fact.edge[i + 1]), float(fact.offset[i + 1])), w)
    return e_out, o_out


# ---------------------------------------------------------------------------
# tree contraction

@dataclass(frozen=True)
class PaddedTree:
    """A tree together with padded edge lengths and the per-vertex maps rho_x."""

    tree: FactorTree
    padded: np.ndarray  # per edge
    total: float        # L' of the whole family of trees this one belongs to

    def padded_norm(self, vertex: int) -> float:
        return float(sum(self.padded[k] for k in self.tree.ancestors(vertex)))

    def rho(self, vertex: int) -> MonotoneC1Map:
        """rho_x: [0, |x|'] -> [0, |x|], flat at every vertex along the root path."""
        chain = self.tree.ancestors(vertex)
        xs = np.concatenate([[0.0], np.cumsum([self.padded[k] for k in chain])])
        ys = np.concatenate([[0.0], np.cumsum([self.tree.edges[k].length for k in chain])])
        return MonotoneC1Map(xs, ys, ("bump",) * len(chain))


def global_padding(trees: list[FactorTree]) -> tuple[list[np.ndarray], float]:
    """One padded-length sequence for all edges of all trees (sorted by decreasing length)."""
    lengths = [(e.length, a, k) for a, tr in enumerate(trees) for k, e in enumerate(tr.edges)]
    if not lengths:
        return [np.zeros(0) for _ in trees], 0.0
    lengths.sort(key=lambda x: -x[0])
    pad = padded_lengths([x[0] for x in lengths])
    out = [np.zeros(len(tr.edges)) for tr in trees]
    for p, (_, a, k) in zip(pad, lengths):
        out[a][k] = p
    return out, float(pad.sum())


def edge_turning(fact: Factorization, n: int = 257) -> np.ndarray:
    """Total turning angle of the fold along each tree edge."""
    out = np.zeros(len(fact.tree.edges))
    for k, e in enumerate(fact.tree.edges):
        pts = fact.fold(np.full(n, k), np.linspace(0.0, e.length, n))
        d = np.diff(pts, axis=0)
        d = d[np.linalg.norm(d, axis=1) > 0]
        if len(d) < 2:
            continue
        cross = d[:-1, 0] * d[1:, 1] - d[:-1, 1] * d[1:, 0] if d.shape[1] == 2 else \
            np.linalg.norm(np.cross(d[:-1], d[1:]), axis=-1)
        out[k] = float(np.sum(np.abs(np.arctan2(cross, np.einsum("ij,ij->i", d[:-1], d[1:])))))
    return out


def contraction_columns(pads: list[np.ndarray], total: float, turning: Optional[list] = None,
                        per_edge: int = 224, lo: int = 256, hi: int = 2048,
                        straight: float = 1e-3) -> int:
    """Grid columns so every curved edge gets about ``per_edge`` of them.

    The finite-difference minor of a straight edge's sweep is zero at any
    resolution, so edges turning by less than ``straight`` radians are not
    counted.
    """
    if total <= 0:
        return lo
    need = 0.0
    for k, p in enumerate(pads):
        curved = np.ones(len(p), bool) if turning is None else np.asarray(turning[k]) > straight
        if np.any(curved):
            need = max(need, per_edge / float(np.min(p[curved] / total)))
    return int(np.clip(64 * np.ceil(need / 64), lo, hi))


def _root_distance(pt: PaddedTree, edge: np.ndarray, offset: np.ndarray, rr: np.ndarray):
    """D[i, j] = |chi(x_i, r_j)|_1 and the edge whose root path carries x_i."""
    tree = pt.tree
    Lp = pt.total
    D = np.zeros((len(edge), len(rr)))
    for e in np.unique(edge):
        m = edge == e
        if e < 0:
            continue
        ed = tree.edges[e]
        x1n = tree.norm(ed.parent)
        x1p = pt.padded_norm(ed.parent)
        x2p = x1p + pt.padded[e]
        rho = pt.rho(ed.child)
        alpha = offset[m] / ed.length
        back = np.clip(Lp - rr, 0.0, x2p)
        q = rho(back)[None, :]
        stay = (Lp - rr >= x2p)[None, :]
        low = (Lp - rr <= x1p)[None, :]
        xn = (x1n + offset[m])[:, None]
        mid = x1n + alpha[:, None] * (q - x1n)
        D[m] = np.where(stay, xn, np.where(low, q, mid))
    return D


def _fold_root_path(fact: Factorization, edge: np.ndarray, D: np.ndarray) -> np.ndarray:
    """fold(sigma_x(D)) where x lies on ``edge`` (root path of its child vertex)."""
    tree = fact.tree
    out = np.empty(D.shape + (fact.curve.dim,))
    for e in np.unique(edge):
        m = edge == e
        if e < 0:
            out[m] = fact.root_point
            continue
        chain = _chain(tree, e)
        starts = np.concatenate([[0.0], np.cumsum([tree.edges[k].length for k in chain])])
        Dm = D[m]
        pos = np.clip(np.searchsorted(starts, Dm, side="right") - 1, 0, len(chain) - 1)
        ch = np.asarray(chain)[pos]
        off = np.clip(Dm - starts[pos], 0.0, None)
        pts = fact.fold(ch.ravel(), off.ravel()).reshape(Dm.shape + (fact.curve.dim,))
        pts[Dm <= 0] = fact.root_point
        out[m] = pts
    return out


def contract_tree(fact: Factorization, n_r: Optional[int] = None, edge: Optional[np.ndarray] = None,
                  offset: Optional[np.ndarray] = None, padded: Optional[PaddedTree] = None,
                  points: Optional[np.ndarray] = None) -> HomotopyGrid:
    """Retract a halting whisker to its root: ``H = fold o chi o gamma_tilde``.

    ``edge``/``offset`` default to the factorization's own gamma_tilde; pass
    the positions of a vertex-stopped curve to contract that curve instead.
    ``points`` are the curve samples the grid starts from.
    """
    e = fact.edge if edge is None else edge
    o = fact.offset if offset is None else offset
    if padded is None:
        pads, total = global_padding([fact.tree])
        padded = PaddedTree(fact.tree, pads[0], total)
    if n_r is None:
        n_r = contraction_columns([padded.padded], padded.total, [edge_turning(fact)])
    lo, hi = fact.samples
    t = fact.curve.params[lo:hi + 1]
    src = fact.fold(e, o) if points is None else points

    resid = src - fact.fold(e, o)

    def sweep(rr):
        D = _root_distance(padded, e, o, rr)
        H = _fold_root_path(fact, e, D)
        H += resid[:, None, :] * _residual_weight(rr, padded.total)[None, :, None]
        H[:, 0] = src
        return H

    if padded.total == 0:
        return HomotopyGrid(t, np.linspace(0, 1, n_r + 1), np.repeat(src[:, None], n_r + 1, axis=1),
                            "contract_tree")
    return _halted(sweep, padded.total, t, n_r, "contract_tree", halt=False)


# ---------------------------------------------------------------------------
# all whiskers at once

def whisker_blocks(word) -> list[tuple[int, int]]:
    """Maximal runs of letters cancelled by free reduction, as (start, stop) positions."""
    keep = set(reduction_survivors(word))
    blocks = []
    i = 0
    n = len(word)
    while i < n:
        if i in keep:
            i += 1
            continue
        j = i
        while j < n and j not in keep:
            j += 1
        blocks.append((i, j))
        i = j
    return blocks


@dataclass(frozen=True)
class WhiskerRemoval:
    grid: HomotopyGrid
    stop: HomotopyGrid
    contraction: HomotopyGrid
    target: SampledCurve
    word: tuple
    reduced: tuple
    blocks: list
    factorizations: list


def remove_whiskers(curve: SampledCurve, eps_geo: float = 0.01, n_r: Optional[int] = None,
                    decomp: Optional[ArcDecomposition] = None, theta_tol: float = 1e-3) -> WhiskerRemoval:
    """Thin homotopy from ``curve`` to a curve whose word is the reduced word.

    Every maximal whisker block is first made to halt at its vertices (one
    global slide along the curve), then all blocks are contracted to their
    roots simultaneously with one padded-length sequence shared by all
    block trees.
    """
    if decomp is None:
        decomp = decompose(curve, eps_geo)
    curve = decomp.curve
    word = word_of(decomp)
    blocks = whisker_blocks(word)
    facts = [factorize(decomp, b, theta_tol=theta_tol) for b in blocks]
    pads, total = global_padding([f.tree for f in facts])
    if n_r is None:
        n_r = contraction_columns(pads, total, [edge_turning(f) for f in facts])
    s = arclength_table(curve)
    bv = [s[decomp.a0[k][0]] for f in facts for k in f.nesting.gap_region]
    stop = _vertex_stop(decomp, bv, n_r, "vanish_at_vertices")
    stopped = stop.curve

    H = np.repeat(stopped.points[:, None, :], n_r + 1, axis=1)
    u = np.linspace(0.0, 1.0, n_r + 1)
    rr = total * ramp(u)
    if total > 0:
        rr[-1] = total
    for f, pad in zip(facts, pads):
        lo, hi = f.samples
        e, o = tree_positions(f, stop.sigma[lo:hi + 1])
        pt = PaddedTree(f.tree, pad, total)
        D = _root_distance(pt, e, o, rr)
        block = _fold_root_path(f, e, D)
        # gamma = fold o gamma_tilde only up to sampling; carry the residual and let it fade
        resid = stopped.points[lo:hi + 1] - f.fold(e, o)
        block += resid[:, None, :] * _residual_weight(rr, total)[None, :, None]
        block[:, 0] = stopped.points[lo:hi + 1]
        H[lo:hi + 1] = block
    contraction = HomotopyGrid(curve.params, u, H, "contract_whiskers")
    H[0, :] = H[0, 0]
    H[-1, :] = H[-1, 0]
    target_pts = H[:, -1].copy()
    v = np.gradient(target_pts, curve.params, axis=0)
    for f in facts:
        lo, hi = f.samples
        v[lo:hi + 1] = 0.0
    target = SampledCurve(curve.params, target_pts, v)
    grid = stop.grid.then(contraction, "remove_whiskers")
    return WhiskerRemoval(grid, stop.grid, contraction, target, word, reduce(word), blocks, facts)


def contract_whisker(curve: SampledCurve, eps_geo: float = 0.01, n_r: Optional[int] = None) -> WhiskerRemoval:
    """Thin homotopy from a whisker to the constant loop (raises for non-whiskers)."""
    res = remove_whiskers(curve, eps_geo, n_r)
    if res.reduced:
        raise NotWhiskerError("curve is not a whisker")
    return res
