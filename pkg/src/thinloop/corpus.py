"""Bundled planar geometry and the curve corpus used by tests and scripts.

All loops are based at the origin.  Petals are the lobes of the rose
``r = cos(4 phi)`` (every other lobe, so neighbouring petals leave their
common point along different rays); spokes are straight segments from the
origin in the empty wedges between petals, with a few secondary branches.
"""
from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .curvekit.curves import Arc, CurveSpec
from .wordcore import Letter, format_word, is_whisker, parse_word


def petal(theta: float, radius: float = 1.0, lobes: int = 4, n: int = 4001) -> np.ndarray:
    half = np.pi / (2 * lobes)
    phi = np.linspace(theta - half, theta + half, n)
    r = radius * np.cos(lobes * (phi - theta))
    pts = np.stack([r * np.cos(phi), r * np.sin(phi)], axis=1)
    pts[0] = pts[-1] = 0.0
    return pts


def segment(start, direction_angle: float, length: float, n: int = 2) -> np.ndarray:
    start = np.asarray(start, dtype=float)
    u = np.array([np.cos(direction_angle), np.sin(direction_angle)])
    return start + np.linspace(0.0, length, n)[:, None] * u


def circle_arc(center, radius: float, a0: float, a1: float, n: int = 2001) -> np.ndarray:
    a = np.linspace(a0, a1, n)
    return np.asarray(center, dtype=float) + radius * np.stack([np.cos(a), np.sin(a)], axis=1)


def standard_arcs() -> dict[str, Arc]:
    arcs = {}
    for k in range(4):
        arcs[f"p{k}"] = Arc(f"p{k}", petal(k * np.pi / 2))
    spoke_len = 0.8
    for k in range(4):
        arcs[f"s{k}"] = Arc(f"s{k}", segment((0, 0), np.pi / 4 + k * np.pi / 2, spoke_len))
    q0 = arcs["s0"].end
    q1 = arcs["s1"].end
    arcs["t0"] = Arc("t0", segment(q0, np.pi / 4 + 0.6, 0.5))
    arcs["v0"] = Arc("v0", segment(q0, np.pi / 4 - 0.6, 0.5))
    # collinear continuation of s1: joining at q1 is a smooth pass-through in arclength
    arcs["u0"] = Arc("u0", segment(q1, 3 * np.pi / 4, 0.4))
    # curved branch off s2's end
    q2 = arcs["s2"].end
    d2 = 5 * np.pi / 4
    center = q2 + 0.35 * np.array([np.cos(d2 + np.pi / 2), np.sin(d2 + np.pi / 2)])
    start_angle = d2 - np.pi / 2
    arcs["w0"] = Arc("w0", circle_arc(center, 0.35, start_angle, start_angle + 1.5))
    return arcs


# which junction each arc leaves from / arrives at, for random word generation
_JUNCTIONS = {
    "p0": ("O", "O"), "p1": ("O", "O"), "p2": ("O", "O"), "p3": ("O", "O"),
    "s0": ("O", "Q0"), "s1": ("O", "Q1"), "s2": ("O", "Q2"), "s3": ("O", "Q3"),
    "t0": ("Q0", "T0"), "v0": ("Q0", "V0"), "u0": ("Q1", "U0"), "w0": ("Q2", "W0"),
}


def spec_from_word(word, arcs: dict | None = None, dwell=None) -> CurveSpec:
    arcs = standard_arcs() if arcs is None else arcs
    w = parse_word(word) if isinstance(word, str) else tuple(word)
    used = {x.name for x in w}
    sub = {k: v for k, v in arcs.items() if k in used}
    return CurveSpec(sub, tuple((x.name, x.sign) for x in w), dwell,
                     base=(0.0, 0.0) if not w else None)


def _random_whisker(rng: np.random.Generator, at: str, depth: int) -> list[Letter]:
    out: list[Letter] = []
    moves = [a for a, (s, _) in _JUNCTIONS.items() if s == at]
    n_moves = int(rng.integers(1, 3)) if depth < 2 else 1
    for _ in range(n_moves):
        if not moves:
            break
        a = moves[int(rng.integers(len(moves)))]
        start, end = _JUNCTIONS[a]
        if start == end:
            sign = 1 if rng.random() < 0.5 else -1
            inner = _random_whisker(rng, at, depth + 1) if depth < 2 and rng.random() < 0.5 else []
            out += [Letter(a, sign)] + inner + [Letter(a, -sign)]
        else:
            inner = _random_whisker(rng, end, depth + 1) if depth < 2 and rng.random() < 0.6 else []
            out += [Letter(a, 1)] + inner + [Letter(a, -1)]
    return out


def random_whisker_word(seed: int) -> tuple:
    rng = np.random.default_rng(seed)
    return tuple(_random_whisker(rng, "O", 0))


def random_petal_word(seed: int, length: int = 4) -> tuple:
    """A random loop word over petals, with a whisker spliced in."""
    rng = np.random.default_rng(seed)
    out: list[Letter] = []
    for _ in range(length):
        out.append(Letter(f"p{int(rng.integers(4))}", 1 if rng.random() < 0.5 else -1))
    k = int(rng.integers(len(out) + 1))
    return tuple(out[:k]) + random_whisker_word(seed + 1000) + tuple(out[k:])


@dataclass(frozen=True)
class CorpusEntry:
    name: str
    word: tuple
    loop: bool = True

    @property
    def text(self) -> str:
        return format_word(self.word)

    @property
    def whisker(self) -> bool:
        return is_whisker(self.word)

    def spec(self) -> CurveSpec:
        return spec_from_word(self.word)


_NAMED = [
    ("out_and_back", "s0 s0'"),
    ("two_edge_path", "s0 t0 t0' s0'"),
    ("branch_q0", "s0 t0 t0' v0 v0' s0'"),
    ("two_spokes", "s0 s0' s1 s1'"),
    ("collinear_corner", "s1 u0 u0' s1'"),
    ("curved_branch", "s2 w0 w0' s2'"),
    ("petal_whisker", "p0 p0'"),
    ("nested_petals", "p0 p1 p1' p0'"),
    ("abbc", "p0 s1 s1' p1"),
    ("commutator", "p0 p1 p0' p1'"),
    ("figure_eight", "p0 p1"),
    ("ababa", "p0 p1 p0 p1' p0'"),
    ("petal_twice", "p0 p0"),
    ("deep_petals", "p0 p1 p2 p2' p1' p0'"),
    ("spokes_and_petal", "s0 s0' p0 s1 s1' p0'"),
    ("petal_around_branch", "p0 s0 t0 t0' s0' p0'"),
    ("repeated_whisker", "s0 s0' s0 s0'"),
    ("commutator_with_whisker", "p2 s3 s3' p3 p2' p3'"),
    ("inverse_petal", "p3'"),
    ("single_petal", "p1"),
]

_OPEN = [
    ("open_spoke", "s0"),
    ("open_two_edges", "s0 t0"),
    ("open_abbc", "s0 t0 t0' v0"),
    ("open_petal_spoke", "p0 s0"),
]


def corpus(n_random: int = 10) -> list[CorpusEntry]:
    """Named loops, open curves and seeded random loops (at least 30 entries)."""
    entries = [CorpusEntry(n, parse_word(w)) for n, w in _NAMED]
    entries += [CorpusEntry(n, parse_word(w), loop=False) for n, w in _OPEN]
    for k in range(n_random):
        if k % 2 == 0:
            entries.append(CorpusEntry(f"random_whisker_{k}", random_whisker_word(k)))
        else:
            entries.append(CorpusEntry(f"random_petals_{k}", random_petal_word(k)))
    return entries


def unit_square() -> np.ndarray:
    return np.array([[0, 0], [1, 0], [1, 1], [0, 1], [0, 0]], dtype=float)
