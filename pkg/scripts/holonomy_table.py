"""Holonomy deviations ||U - I|| per corpus loop and group, with the Richardson order."""
from dataclasses import dataclass

import numpy as np

from _common import parse_into, write_rows
from thinloop.corpus import corpus
from thinloop.curvekit import synth_curve
from thinloop.holonomy import GROUPS, get_group, holonomy_trivial, random_connection, richardson_order


@dataclass
class Config:
    samples: int = 512
    connections: int = 20
    seed: int = 0
    csv: str = ""


def main(argv=None):
    cfg = parse_into(Config, argv, __doc__)
    rows = []
    for e in corpus():
        if not e.loop:
            continue
        c = synth_curve(e.spec(), cfg.samples)
        row = {"name": e.name, "whisker": e.whisker}
        for name in sorted(GROUPS):
            row[name] = f"{holonomy_trivial(c, name, cfg.connections, cfg.seed).worst:.2e}"
        rows.append(row)
    write_rows(rows, cfg.csv)
    coarse = synth_curve(next(e for e in corpus() if e.name == "figure_eight").spec(), 64)
    orders = [richardson_order(coarse, random_connection(get_group(g), cfg.seed), 64) for g in sorted(GROUPS)]
    print("# Richardson order on figure_eight: " + ", ".join(f"{g} {o:.2f}" for g, o in zip(sorted(GROUPS), orders)))
    print(f"# min order {np.min(orders):.2f}")


if __name__ == "__main__":
    main()
