"""Factor a whisker loop through a finite tree embedded in sparse l1.

A whisker word pairs every letter with a later inverse in a well-nested
way.  Each pair bounds a semi-annulus; the regions between nested
semi-annuli are the vertices of a tree whose edges are the pairs, with
edge lengths taken from the curve.  The loop then factors as
``gamma = fold o gamma_tilde`` where ``gamma_tilde`` walks the tree and
``fold`` maps tree points back onto the left occurrence of each letter.
"""
from __future__ import annotations

from dataclasses import dataclass, field, replace
from typing import Optional

import numpy as np

from .curvekit.curves import ArclengthParam, SampledCurve, arclength_table
from .curvekit.decompose import ArcDecomposition, decompose, word_of
from .wordcore import Letter, as_word, is_valid_pairing, is_whisker, nesting_pairing


class NotWhiskerError(ValueError):
    """The word (or block) does not reduce to the empty word."""


# ---------------------------------------------------------------------------
# combinatorics

def relabel_occurrences(w, pairing=None) -> tuple:
    """Give each matched pair its own letter, positive at the first occurrence.

    The new names append an occurrence counter to the original name, so
    ``a a' a a'`` becomes ``a1 a1' a2 a2'``.
    """
    w = as_word(w)
    if pairing is None:
        pairing = nesting_pairing(w)
        if pairing is None:
            raise NotWhiskerError("word has no nested inverse pairing")
    elif not is_valid_pairing(w, pairing):
        raise ValueError("invalid pairing")
    out: list[Optional[Letter]] = [None] * len(w)
    counts: dict[str, int] = {}
    for i, j in sorted(tuple(sorted(p)) for p in pairing):
        counts[w[i].name] = counts.get(w[i].name, 0) + 1
        name = f"{w[i].name}{counts[w[i].name]}"
        out[i] = Letter(name, 1)
        out[j] = Letter(name, -1)
    return tuple(out)


@dataclass(frozen=True)
class SemiAnnulus:
    """A matched pair of word spans.

    ``left`` and ``right`` are inclusive word-position ranges; they hold one
    position each until spurious corners are fused.
    """

    letter: str
    left: tuple
    right: tuple
    parent: Optional[int]
    children: tuple = ()


@dataclass(frozen=True)
class VertexRegion:
    """Connected region between a semi-annulus and the ones nested inside it.

    ``gaps`` lists the word gaps the region meets on the axis: gap ``k`` sits
    between positions ``k - 1`` and ``k``.
    """

    id: int
    kind: str
    above: Optional[int]
    below: tuple
    gaps: tuple


@dataclass(frozen=True)
class Nesting:
    word: tuple
    annuli: tuple
    regions: tuple
    gap_region: dict
    offset: int = 0

    @property
    def gaps(self) -> range:
        return range(self.offset, self.offset + len(self.word) + 1)

    def region_of_annulus(self, a: int) -> VertexRegion:
        return self.regions[a + 1]


def _kind(n_children: int) -> str:
    return "tip" if n_children == 0 else "corner" if n_children == 1 else "branch"


def _regions(word, annuli, offset) -> tuple[tuple, dict]:
    # region 0 is the root; region a + 1 lies just below annulus a
    gap_region: dict[int, int] = {}
    covered: dict[int, int] = {}
    for a, ann in enumerate(annuli):
        for k in range(ann.left[1] + 1, ann.right[0] + 1):
            # innermost wins: children are listed after parents
            covered[k] = a
    interior = set()
    for ann in annuli:
        interior.update(range(ann.left[0] + 1, ann.left[1] + 1))
        interior.update(range(ann.right[0] + 1, ann.right[1] + 1))
    for k in range(offset, offset + len(word) + 1):
        if k in interior:
            continue
        gap_region[k] = covered[k] + 1 if k in covered else 0
    regions = [VertexRegion(0, "root", None, tuple(a for a, x in enumerate(annuli) if x.parent is None),
                            tuple(k for k, r in gap_region.items() if r == 0))]
    for a, ann in enumerate(annuli):
        regions.append(VertexRegion(a + 1, _kind(len(ann.children)), a, ann.children,
                                    tuple(k for k, r in gap_region.items() if r == a + 1)))
    return tuple(regions), gap_region


def build_nesting(w, offset: int = 0) -> Nesting:
    """Parenthesis structure of a relabeled whisker word.

    ``offset`` shifts word positions, for blocks cut out of a longer word.
    """
    w = as_word(w)
    pairing = nesting_pairing(w)
    if pairing is None:
        raise NotWhiskerError("build_nesting needs a whisker word")
    pairs = sorted(tuple(sorted(p)) for p in pairing)
    parent: list[Optional[int]] = []
    children: list[list[int]] = [[] for _ in pairs]
    stack: list[tuple[int, int]] = []  # (annulus, right position)
    for a, (i, j) in enumerate(pairs):
        while stack and stack[-1][1] < i:
            stack.pop()
        par = stack[-1][0] if stack else None
        parent.append(par)
        if par is not None:
            children[par].append(a)
        stack.append((a, j))
    annuli = tuple(SemiAnnulus(w[i].name, (i + offset, i + offset), (j + offset, j + offset), parent[a],
                               tuple(children[a])) for a, (i, j) in enumerate(pairs))
    regions, gap_region = _regions(w, annuli, offset)
    return Nesting(w, annuli, regions, gap_region, offset)


# ---------------------------------------------------------------------------
# geometry attached to a decomposition

@dataclass(frozen=True)
class _Geometry:
    curve: SampledCurve
    decomp: ArcDecomposition
    s: np.ndarray
    param: ArclengthParam

    @classmethod
    def of(cls, decomp: ArcDecomposition) -> "_Geometry":
        return cls(decomp.curve, decomp, arclength_table(decomp.curve), ArclengthParam(decomp.curve))

    def span_samples(self, span: tuple) -> tuple[int, int]:
        ivs = self.decomp.intervals
        return ivs[span[0]].start, ivs[span[1]].end

    def span_arclength(self, span: tuple) -> tuple[float, float]:
        a, b = self.span_samples(span)
        return float(self.s[a]), float(self.s[b])

    def gap_core(self, k: int) -> tuple[int, int]:
        return self.decomp.a0[k]

    def one_sided_tangents(self, k: int, h: float) -> tuple[np.ndarray, np.ndarray]:
        lo, hi = self.gap_core(k)
        s_in, s_out = self.s[lo], self.s[hi]
        p = self.param
        t_in = p(s_in) - p(max(s_in - h, 0.0))
        t_out = p(min(s_out + h, p.L)) - p(s_out)
        return _unit(t_in), _unit(t_out)


def _unit(v: np.ndarray) -> np.ndarray:
    n = np.linalg.norm(v)
    return v / n if n > 0 else v


def _angle(u: np.ndarray, v: np.ndarray) -> float:
    if not np.any(u) or not np.any(v):
        return np.pi
    return float(np.arccos(np.clip(u @ v, -1.0, 1.0)))


def corner_angles(nesting: Nesting, geo: _Geometry, h: float) -> dict:
    """For each corner region: the tangent turning angles at its two gaps."""
    out = {}
    for reg in nesting.regions:
        if reg.kind != "corner":
            continue
        angles = []
        for k in reg.gaps:
            u, v = geo.one_sided_tangents(k, h)
            angles.append(_angle(u, v))
        out[reg.id] = tuple(angles)
    return out


def _fuse(nesting: Nesting, a: int) -> Nesting:
    """Merge annulus ``a`` with its only child."""
    ann = nesting.annuli[a]
    (c,) = ann.children
    child = nesting.annuli[c]
    merged = SemiAnnulus(ann.letter + "+" + child.letter, (ann.left[0], child.left[1]),
                         (child.right[0], ann.right[1]), ann.parent, child.children)
    keep = [i for i in range(len(nesting.annuli)) if i != c]
    new_index = {old: new for new, old in enumerate(keep)}
    annuli = []
    for old in keep:
        x = merged if old == a else nesting.annuli[old]
        par = x.parent
        if par == c:
            par = a
        annuli.append(replace(x, parent=None if par is None else new_index[par],
                              children=tuple(new_index[a if ch == c else ch] for ch in x.children)))
    regions, gap_region = _regions(nesting.word, tuple(annuli), nesting.offset)
    return Nesting(nesting.word, tuple(annuli), regions, gap_region, nesting.offset)


def detect_spurious_corners(nesting: Nesting, decomp: ArcDecomposition, theta_tol: float = 1e-3,
                            h: Optional[float] = None) -> tuple[Nesting, list]:
    """Fuse corners the curve passes through smoothly, until none are left.

    A corner is spurious when the unit tangents in arclength agree within
    ``theta_tol`` across both of its gaps; tangents are one-sided chords of
    arclength ``h`` (default ``eps_geo``) taken outside the gap cores.
    Returns the fused nesting and the list of fused letter pairs.
    """
    geo = _Geometry.of(decomp)
    h = decomp.eps_geo if h is None else h
    fused = []
    while True:
        hit = None
        for reg_id, angles in corner_angles(nesting, geo, h).items():
            if all(x <= theta_tol for x in angles):
                hit = reg_id - 1
                break
        if hit is None:
            return nesting, fused
        ann = nesting.annuli[hit]
        fused.append((ann.letter, nesting.annuli[ann.children[0]].letter))
        nesting = _fuse(nesting, hit)


# ---------------------------------------------------------------------------
# the tree

@dataclass(frozen=True)
class TreeEdge:
    letter: str
    parent: int
    child: int
    length: float


@dataclass(frozen=True)
class FactorTree:
    """Vertices are regions of a nesting; edge ``a`` joins region ``parent`` to ``a + 1``."""

    regions: tuple
    edges: tuple
    coords: tuple  # per vertex: dict letter -> coordinate

    @property
    def root(self) -> int:
        return 0

    def edge_by_letter(self, letter: str) -> TreeEdge:
        for e in self.edges:
            if e.letter == letter:
                return e
        raise KeyError(letter)

    def norm(self, vertex: int) -> float:
        return float(sum(self.coords[vertex].values()))

    def ancestors(self, vertex: int) -> list[int]:
        """Edge indices from the root down to ``vertex``."""
        path = []
        v = vertex
        while v != 0:
            path.append(v - 1)
            v = self.edges[v - 1].parent
        return path[::-1]

    def point_coords(self, edge: int, offset: float) -> dict:
        if edge < 0:
            return {}
        e = self.edges[edge]
        c = dict(self.coords[e.parent])
        if offset > 0:
            c[e.letter] = float(offset)
        return c

    def distance(self, x: tuple, y: tuple) -> float:
        """l1 distance between tree points given as ``(edge, offset)``."""
        return l1_distance(self.point_coords(*x), self.point_coords(*y))

    def is_tree(self) -> bool:
        n = len(self.regions)
        if len(self.edges) != n - 1:
            return False
        seen = {0}
        for e in self.edges:
            if e.parent not in seen or e.child in seen:
                return False
            seen.add(e.child)
        return len(seen) == n

    def edge_list(self) -> str:
        lines = ["# letter parent child length"]
        for e in self.edges:
            lines.append(f"{e.letter} {e.parent} {e.child} {e.length:.12g}")
        return "\n".join(lines) + "\n"


def l1_distance(x: dict, y: dict) -> float:
    keys = set(x) | set(y)
    return float(sum(abs(x.get(k, 0.0) - y.get(k, 0.0)) for k in keys))


def build_tree(nesting: Nesting, lengths: dict) -> FactorTree:
    edges = []
    coords: list[dict] = [dict() for _ in nesting.regions]
    # parents precede children in annulus order
    for a, ann in enumerate(nesting.annuli):
        parent_vertex = 0 if ann.parent is None else ann.parent + 1
        l = float(lengths[ann.letter])
        edges.append(TreeEdge(ann.letter, parent_vertex, a + 1, l))
        c = dict(coords[parent_vertex])
        c[ann.letter] = l
        coords[a + 1] = c
    return FactorTree(nesting.regions, tuple(edges), tuple(coords))


def root_path(tree: FactorTree, edge: int, offset: float) -> list[tuple[int, float, float]]:
    """Isometric path from the root to the point ``(edge, offset)``.

    Returned as pieces ``(edge, start distance, length)``: the path spends
    ``[start, start + length]`` of its unit-speed time on that edge.
    """
    if edge < 0:
        return []
    e = tree.edges[edge]
    pieces = []
    r = 0.0
    for k in tree.ancestors(e.parent):
        pieces.append((k, r, tree.edges[k].length))
        r += tree.edges[k].length
    if offset > 0:
        pieces.append((edge, r, float(offset)))
    return pieces


def root_path_eval(tree: FactorTree, edge: int, offset: float, r) -> tuple[np.ndarray, np.ndarray]:
    """sigma_x(r) as arrays of (edge, offset); r is clipped to [0, |x|]."""
    r = np.atleast_1d(np.asarray(r, dtype=float))
    out_e = np.full(r.shape, -1, dtype=int)
    out_o = np.zeros(r.shape)
    for k, start, length in root_path(tree, edge, offset):
        m = r > start
        out_e[m] = k
        out_o[m] = np.minimum(r[m] - start, length)
    return out_e, out_o


# ---------------------------------------------------------------------------
# factorization

@dataclass(frozen=True)
class Factorization:
    """``gamma = fold o gamma_tilde`` on the samples of one whisker block.

    ``edge[i]``/``offset[i]`` give gamma_tilde at sample ``lo + i``; edge -1
    is the root.  Vertices other than the root are the far end of their
    edge (offset = edge length).
    """

    tree: FactorTree
    nesting: Nesting
    curve: SampledCurve
    samples: tuple  # (lo, hi) inclusive
    edge: np.ndarray
    offset: np.ndarray
    fold_start: np.ndarray  # per edge: arclength where its left occurrence starts
    root_point: np.ndarray
    fused: list = field(default_factory=list)
    _param: Optional[ArclengthParam] = None
    # per edge: parent vertex image minus the left occurrence's first point
    fold_shift: Optional[np.ndarray] = None

    def fold(self, edge, offset) -> np.ndarray:
        """Curve point for tree points (vectorized).

        Along an edge this is the left occurrence at the given arclength
        offset, plus a correction that fades linearly from the parent end:
        the samples a vertex stands for are not all at one point, and the
        correction keeps the fold continuous there.
        """
        edge = np.atleast_1d(np.asarray(edge, dtype=int))
        offset = np.atleast_1d(np.asarray(offset, dtype=float))
        param = self._param or ArclengthParam(self.curve)
        e = np.maximum(edge, 0)
        s = np.where(edge >= 0, self.fold_start[e] + offset, 0.0)
        pts = param(s)
        if self.fold_shift is not None and len(self.fold_shift):
            lengths = np.array([x.length for x in self.tree.edges])
            w = np.clip(1.0 - offset / lengths[e], 0.0, 1.0)
            pts = pts + self.fold_shift[e] * w[..., None]
        pts[edge < 0] = self.root_point
        return pts

    def vertex_point(self, vertex: int) -> np.ndarray:
        if vertex == 0:
            return self.root_point
        e = self.tree.edges[vertex - 1]
        return self.fold([vertex - 1], [e.length])[0]

    def norms(self) -> np.ndarray:
        """|gamma_tilde(t)|_1 per sample."""
        base = np.array([self.tree.norm(e.parent) for e in self.tree.edges] + [0.0])
        return np.where(self.edge >= 0, base[self.edge] + self.offset, 0.0)

    def factor_error(self) -> float:
        lo, hi = self.samples
        return float(np.max(np.linalg.norm(self.curve.points[lo:hi + 1] - self.fold(self.edge, self.offset), axis=1)))

    def lipschitz_estimate(self, n_pairs: int = 10_000, seed: int = 0) -> float:
        """max |fold(x) - fold(y)| / |x - y|_1 over random tree-point pairs."""
        rng = np.random.default_rng(seed)
        lengths = np.array([e.length for e in self.tree.edges])
        if lengths.size == 0:
            return 0.0
        p = lengths / lengths.sum()
        e1 = rng.choice(len(lengths), n_pairs, p=p)
        e2 = rng.choice(len(lengths), n_pairs, p=p)
        o1 = rng.random(n_pairs) * lengths[e1]
        o2 = rng.random(n_pairs) * lengths[e2]
        f1 = self.fold(e1, o1)
        f2 = self.fold(e2, o2)
        num = np.linalg.norm(f1 - f2, axis=1)
        den = np.array([self.tree.distance((a, x), (b, y)) for a, x, b, y in zip(e1, o1, e2, o2)])
        ok = den > 1e-12
        return float(np.max(num[ok] / den[ok])) if np.any(ok) else 0.0

    def gamma_tilde_lipschitz_defect(self, n_pairs: int = 1000, seed: int = 0) -> float:
        """max (|gt(t1) - gt(t2)|_1 - arclength(t1, t2)) over random sample pairs."""
        lo, hi = self.samples
        s = arclength_table(self.curve)[lo:hi + 1]
        rng = np.random.default_rng(seed)
        i = rng.integers(0, len(s), n_pairs)
        j = rng.integers(0, len(s), n_pairs)
        d = np.array([self.tree.distance((self.edge[a], self.offset[a]), (self.edge[b], self.offset[b]))
                      for a, b in zip(i, j)])
        return float(np.max(d - np.abs(s[i] - s[j])))


def factorize(decomp: ArcDecomposition, block: Optional[tuple] = None, theta_tol: float = 1e-3,
              fuse: bool = True) -> Factorization:
    """Factor the letters ``block = (p0, p1)`` (positions p0..p1-1) through a tree.

    The default block is the whole word.  The block must be a whisker; its
    samples run from the core of gap p0 to the core of gap p1.
    """
    word = word_of(decomp)
    p0, p1 = (0, len(word)) if block is None else block
    sub = word[p0:p1]
    if not is_whisker(sub):
        raise NotWhiskerError("block is not a whisker")
    geo = _Geometry.of(decomp)
    nesting = build_nesting(relabel_occurrences(sub), offset=p0)
    fused = []
    if fuse:
        nesting, fused = detect_spurious_corners(nesting, decomp, theta_tol)

    lengths = {}
    fold_start = []
    right_spans = []
    for ann in nesting.annuli:
        a0, a1 = geo.span_arclength(ann.left)
        lengths[ann.letter] = a1 - a0
        fold_start.append(a0)
        right_spans.append(geo.span_arclength(ann.right))
    tree = build_tree(nesting, lengths)

    lo = decomp.a0[p0][0]
    hi = decomp.a0[p1][1]
    n = hi - lo + 1
    edge = np.full(n, -1, dtype=int)
    offset = np.zeros(n)
    s = geo.s
    for a, ann in enumerate(nesting.annuli):
        l = lengths[ann.letter]
        i0, i1 = geo.span_samples(ann.left)
        edge[i0 - lo:i1 - lo + 1] = a
        offset[i0 - lo:i1 - lo + 1] = s[i0:i1 + 1] - s[i0]
        j0, j1 = geo.span_samples(ann.right)
        r0, r1 = right_spans[a]
        lr = r1 - r0
        edge[j0 - lo:j1 - lo + 1] = a
        offset[j0 - lo:j1 - lo + 1] = l * (r1 - s[j0:j1 + 1]) / lr if lr > 0 else 0.0
    # gap cores are vertices
    for k, reg in nesting.gap_region.items():
        c0, c1 = decomp.a0[k]
        c0, c1 = max(c0, lo), min(c1, hi)
        if reg == 0:
            edge[c0 - lo:c1 - lo + 1] = -1
            offset[c0 - lo:c1 - lo + 1] = 0.0
        else:
            edge[c0 - lo:c1 - lo + 1] = reg - 1
            offset[c0 - lo:c1 - lo + 1] = tree.edges[reg - 1].length
    offset = np.clip(offset, 0.0, np.array([e.length for e in tree.edges] + [0.0])[edge])
    # a block ending the curve is anchored at the curve's end point
    anchor = hi if hi == decomp.curve.n and lo != 0 else lo
    root_point = decomp.curve.points[anchor].copy()
    fold_start = np.array(fold_start)
    shift = np.zeros((len(tree.edges), decomp.curve.dim))
    for k, e in enumerate(tree.edges):
        if e.parent == 0:
            image = root_point
        else:
            p = tree.edges[e.parent - 1]
            image = geo.param(fold_start[e.parent - 1] + p.length)
        shift[k] = image - geo.param(fold_start[k])
    return Factorization(tree, nesting, decomp.curve, (lo, hi), edge, offset, fold_start,
                         root_point, fused, geo.param, shift)


def factorize_curve(curve: SampledCurve, eps_geo: float = 0.01, theta_tol: float = 1e-3) -> Factorization:
    return factorize(decompose(curve, eps_geo), theta_tol=theta_tol)


# ---------------------------------------------------------------------------
# reading words off tree walks

def _chain(tree: FactorTree, edge: int) -> list[int]:
    return [] if edge < 0 else tree.ancestors(tree.edges[edge].parent) + [edge]


def _step_parts(tree: FactorTree, x: tuple, y: tuple) -> list[tuple[int, int]]:
    """Edges crossed (with +1 away from / -1 toward the root) going from x to y."""
    (ex, ox), (ey, oy) = x, y
    if ex == ey:
        if ex < 0 or ox == oy:
            return []
        return [(ex, 1 if oy > ox else -1)]
    cx, cy = _chain(tree, ex), _chain(tree, ey)
    n = 0
    while n < min(len(cx), len(cy)) and cx[n] == cy[n]:
        n += 1
    parts = []
    if ex >= 0 and ex in cy:
        if ox < tree.edges[ex].length:
            parts.append((ex, 1))
    else:
        for k in reversed(cx[n:]):
            if not (k == ex and ox == 0.0):
                parts.append((k, -1))
    if ey >= 0 and ey in cx:
        if oy < tree.edges[ey].length:
            parts.append((ey, -1))
    else:
        for k in cy[n:]:
            if not (k == ey and oy == 0.0):
                parts.append((k, 1))
    return parts


def word_from_tree_walk(tree: FactorTree, edge: np.ndarray, offset: np.ndarray) -> tuple:
    """Letters of a tree walk: one per maximal monotone passage along an edge.

    A passage is positive when it moves away from the root, i.e. when the
    norm |x|_1 increases along it.  Pauses contribute nothing.
    """
    parts: list[tuple[int, int]] = []
    for i in range(len(edge) - 1):
        for p in _step_parts(tree, (int(edge[i]), float(offset[i])), (int(edge[i + 1]), float(offset[i + 1]))):
            if not parts or parts[-1] != p:
                parts.append(p)
    return tuple(Letter(tree.edges[k].letter, d) for k, d in parts)


def random_tree_walk(tree: FactorTree, steps: int, seed: int = 0) -> list[tuple[int, int]]:
    """Closed random walk from the root along whole edges: ``(edge, +1 down / -1 up)``."""
    rng = np.random.default_rng(seed)
    children: dict[int, list[int]] = {}
    for k, e in enumerate(tree.edges):
        children.setdefault(e.parent, []).append(k)
    v = 0
    path: list[tuple[int, int]] = []
    for _ in range(steps):
        opts = [(k, 1) for k in children.get(v, [])]
        if v != 0:
            opts.append((v - 1, -1))
        if not opts:
            break
        k, d = opts[int(rng.integers(len(opts)))]
        path.append((k, d))
        v = tree.edges[k].child if d > 0 else tree.edges[k].parent
    while v != 0:
        path.append((v - 1, -1))
        v = tree.edges[v - 1].parent
    return path
