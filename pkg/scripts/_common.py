"""Shared bits for the experiment scripts: argument parsing into a dataclass and CSV output."""
import argparse
import csv
import sys
from dataclasses import fields
from pathlib import Path


def parse_into(cls, argv=None, doc=None):
    p = argparse.ArgumentParser(description=doc)
    for f in fields(cls):
        p.add_argument("--" + f.name.replace("_", "-"), type=type(f.default), default=f.default)
    return cls(**vars(p.parse_args(argv)))


def write_rows(rows: list, path: str = "") -> None:
    if not rows:
        return
    out = open(path, "w", newline="") if path else sys.stdout
    try:
        w = csv.DictWriter(out, fieldnames=list(rows[0]))
        w.writeheader()
        w.writerows(rows)
    finally:
        if path:
            out.close()
            print(f"wrote {Path(path)}", file=sys.stderr)
