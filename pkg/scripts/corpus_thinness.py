"""Thinness report for every homotopy grid built on the corpus."""
import time
from dataclasses import dataclass

from _common import parse_into, write_rows
from thinloop.corpus import corpus
from thinloop.curvekit import decompose, synth_curve
from thinloop.thinhomotopy import check_thin, contract_tree, remove_whiskers, vanish_at_vertices
from thinloop.treefactor import factorize
from thinloop.wordcore import is_whisker


@dataclass
class Config:
    samples: int = 512
    eps_geo: float = 0.01
    tol_rank: float = 1e-3
    tol_edge: float = 1e-6
    only: str = ""
    csv: str = ""


def main(argv=None):
    cfg = parse_into(Config, argv, __doc__)
    wanted = set(filter(None, cfg.only.split(",")))
    rows = []
    for e in corpus():
        if wanted and e.name not in wanted:
            continue
        t0 = time.perf_counter()
        c = synth_curve(e.spec(), cfg.samples)
        d = decompose(c, cfg.eps_geo)
        res = remove_whiskers(c, cfg.eps_geo, decomp=d)
        grids = [res.stop, res.contraction, res.grid]
        if e.loop and is_whisker(e.word):
            f = factorize(d)
            grids += [vanish_at_vertices(d, f).grid, contract_tree(f)]
        for g in grids:
            rep = check_thin(g, cfg.tol_rank, cfg.tol_edge, source_points=c.points, tol_image=cfg.eps_geo)
            rows.append({"name": e.name, "grid": g.tag, "shape": "x".join(map(str, g.H.shape[:2])),
                         "minor": f"{rep.max_minor:.2e}", "edge": f"{rep.max_edge_partial:.2e}",
                         "c1_ratio": f"{rep.c1_ratio:.2f}", "image": f"{rep.containment:.2e}",
                         "passed": rep.passed})
        rows[-1]["seconds"] = f"{time.perf_counter() - t0:.1f}"
    for r in rows:
        r.setdefault("seconds", "")
    write_rows(rows, cfg.csv)


if __name__ == "__main__":
    main()
