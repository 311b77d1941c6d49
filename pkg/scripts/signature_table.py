"""Signature levels and iterated integrals of random forms on the corpus loops."""
from dataclasses import dataclass

import numpy as np

from _common import parse_into, write_rows
from thinloop.corpus import corpus
from thinloop.curvekit import synth_curve
from thinloop.holonomy import iterated_integrals_with_forms, random_form, signature


@dataclass
class Config:
    samples: int = 512
    level: int = 4
    depth: int = 3
    seed: int = 0
    csv: str = ""


def main(argv=None):
    cfg = parse_into(Config, argv, __doc__)
    rows = []
    for e in corpus():
        if not e.loop:
            continue
        c = synth_curve(e.spec(), cfg.samples)
        S = signature(c, cfg.level)
        row = {"name": e.name, "whisker": e.whisker}
        for k in range(1, cfg.level + 1):
            row[f"level_{k}"] = f"{np.max(np.abs(S.level(k))):.2e}"
        forms = [random_form(cfg.seed + j) for j in range(cfg.depth)]
        row[f"iterated_{cfg.depth}"] = f"{abs(iterated_integrals_with_forms(c, forms)):.2e}"
        rows.append(row)
    write_rows(rows, cfg.csv)


if __name__ == "__main__":
    main()
