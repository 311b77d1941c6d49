"""Run all four equivalence routes on every corpus loop and tabulate the verdicts."""
import time
from dataclasses import dataclass

from _common import parse_into, write_rows
from thinloop.battery import battery
from thinloop.config import RunConfig
from thinloop.corpus import corpus
from thinloop.curvekit import synth_curve
from thinloop.wordcore import format_word, reduce


@dataclass
class Config:
    samples: int = 512
    group: str = "SU2"
    connections: int = 20
    seed: int = 0
    only: str = ""       # comma-separated corpus names; empty runs every loop
    csv: str = ""


def main(argv=None):
    cfg = parse_into(Config, argv, __doc__)
    run = RunConfig(samples_per_arc=cfg.samples, group=cfg.group, connections=cfg.connections, seed=cfg.seed)
    wanted = set(filter(None, cfg.only.split(",")))
    rows = []
    for e in corpus():
        if not e.loop or (wanted and e.name not in wanted):
            continue
        t0 = time.perf_counter()
        rep = battery(synth_curve(e.spec(), cfg.samples), run)
        row = {"name": e.name, "word": e.text, "reduced": format_word(reduce(e.word)) or "-"}
        row.update({f"route_{r.route}": r.verdict for r in rep.routes})
        row["holonomy_worst"] = f"{rep.route('c').detail['worst']:.3e}"
        row["agree"] = rep.agree
        row["seconds"] = f"{time.perf_counter() - t0:.1f}"
        rows.append(row)
    write_rows(rows, cfg.csv)


if __name__ == "__main__":
    main()
