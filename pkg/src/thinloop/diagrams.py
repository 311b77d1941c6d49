"""Static SVG drawings: semi-annuli over a whisker word, the dual tree, curves."""
from __future__ import annotations

from typing import Optional
from xml.sax.saxutils import escape

import numpy as np

from .treefactor import FactorTree, Nesting

_PALETTE = ("#cfe3f5", "#f7dcc4", "#d6efd0", "#ead5f2", "#f5efc4", "#d0ecec")


def _svg(width: float, height: float, body: list) -> str:
    head = (f'<svg xmlns="http://www.w3.org/2000/svg" width="{width:.0f}" height="{height:.0f}" '
            f'viewBox="0 0 {width:.0f} {height:.0f}" font-family="sans-serif" font-size="12">')
    return "\n".join([head, f'<rect width="100%" height="100%" fill="white"/>', *body, "</svg>"]) + "\n"


def _half_ring(x0: float, x1: float, x2: float, x3: float, y: float) -> str:
    """Region between the semicircles over [x0, x3] and [x1, x2]."""
    R = (x3 - x0) / 2
    r = (x2 - x1) / 2
    d = f"M {x0:.2f} {y:.2f} A {R:.2f} {R:.2f} 0 0 1 {x3:.2f} {y:.2f} L {x2:.2f} {y:.2f} "
    if r > 0:
        d += f"A {r:.2f} {r:.2f} 0 0 0 {x1:.2f} {y:.2f} "
    else:
        d += f"L {x1:.2f} {y:.2f} "
    return d + "Z"


def nesting_svg(nesting: Nesting, tree: Optional[FactorTree] = None, unit: float = 48.0) -> str:
    """Semi-annuli above the word axis and, if given, the dual tree below."""
    n = len(nesting.word)
    off = nesting.offset
    pad = 24.0
    width = 2 * pad + unit * max(n, 1)
    top = pad + unit * max(n, 1) / 2
    body = []

    def gx(k):  # gap k on the axis
        return pad + unit * (k - off)

    for a, ann in enumerate(nesting.annuli):
        x0, x1 = gx(ann.left[0]), gx(ann.left[1] + 1)
        x2, x3 = gx(ann.right[0]), gx(ann.right[1] + 1)
        color = _PALETTE[a % len(_PALETTE)]
        body.append(f'<path d="{_half_ring(x0, x1, x2, x3, top)}" fill="{color}" stroke="#555" '
                    f'stroke-width="1"><title>{escape(ann.letter)}</title></path>')
        body.append(f'<text x="{(x0 + x3) / 2:.2f}" y="{top - (x3 - x0) / 2 + 14:.2f}" '
                    f'text-anchor="middle">{escape(ann.letter)}</text>')
    body.append(f'<line x1="{pad:.2f}" y1="{top:.2f}" x2="{width - pad:.2f}" y2="{top:.2f}" stroke="black"/>')
    for i, x in enumerate(nesting.word):
        body.append(f'<text x="{gx(off + i) + unit / 2:.2f}" y="{top + 16:.2f}" text-anchor="middle">'
                    f'{escape(str(x))}</text>')
    height = top + 32
    if tree is not None:
        depth = {0: 0}
        for e in tree.edges:
            depth[e.child] = depth[e.parent] + 1
        xs = {}
        for reg in nesting.regions:
            gaps = reg.gaps or (off,)
            xs[reg.id] = float(np.mean([gx(k) for k in gaps]))
        base = height + 16
        step = 56.0
        for e in tree.edges:
            xa, ya = xs[e.parent], base + step * depth[e.parent]
            xb, yb = xs[e.child], base + step * depth[e.child]
            body.append(f'<line x1="{xa:.2f}" y1="{ya:.2f}" x2="{xb:.2f}" y2="{yb:.2f}" stroke="#333"/>')
            body.append(f'<text x="{(xa + xb) / 2 + 6:.2f}" y="{(ya + yb) / 2:.2f}">'
                        f'{escape(e.letter)} ({e.length:.3g})</text>')
        for v, x in xs.items():
            y = base + step * depth.get(v, 0)
            fill = "black" if v == 0 else "white"
            body.append(f'<circle cx="{x:.2f}" cy="{y:.2f}" r="4" fill="{fill}" stroke="black"/>')
        height = base + step * max(depth.values(), default=0) + pad
    return _svg(width, height, body)


def curve_svg(points, size: float = 400.0, pad: float = 16.0, stroke: str = "#1f4e8c",
              extra: Optional[list] = None) -> str:
    """Polyline drawing of one or more point arrays scaled into a square canvas."""
    sets = [np.asarray(points, dtype=float)] + [np.asarray(p, dtype=float) for p in (extra or [])]
    allp = np.concatenate(sets)[:, :2]
    lo, hi = allp.min(axis=0), allp.max(axis=0)
    scale = (size - 2 * pad) / max(float(np.max(hi - lo)), 1e-12)
    body = []
    for k, p in enumerate(sets):
        q = (p[:, :2] - lo) * scale + pad
        q[:, 1] = size - q[:, 1]
        pts = " ".join(f"{x:.2f},{y:.2f}" for x, y in q)
        color = stroke if k == 0 else "#c0392b"
        body.append(f'<polyline points="{pts}" fill="none" stroke="{color}" stroke-width="1.5"/>')
    return _svg(size, size, body)
