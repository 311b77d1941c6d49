"""Run configuration: tolerances, grid sizes, seeds and outputs.

Values are resolved as defaults, then a JSON config file, then command-line
flags (later sources win).
"""
from __future__ import annotations

import json
from dataclasses import asdict, dataclass, field, fields, replace
from pathlib import Path
from typing import Optional

CONFIG_FORMAT = "thinloop-config/1"
EMIT_CHOICES = ("svg", "frames", "tables")


@dataclass(frozen=True)
class RunConfig:
    eps_geo: float = 0.01          # geometric identification radius
    v_min_rel: float = 1e-3        # critical speed, relative to the curve's top speed
    theta_tol: float = 1e-3        # corner angle treated as straight (radians)
    tol_rank: float = 1e-3         # relative 2x2 minor bound for thinness
    tol_edge: float = 1e-6         # boundary partial derivative bound
    tol_group: float = 1e-8        # group membership defect
    tol_holonomy: float = 1e-5     # ||U - I|| counted as trivial
    tol_factor: float = 1e-3       # factorization error, relative to curve length
    samples_per_arc: int = 512
    grid: Optional[int] = None     # homotopy columns; None picks them per curve
    steps: int = 0                 # transport steps; 0 means one per sample interval
    group: str = "SU2"
    connections: int = 20
    seed: int = 0
    signature_level: int = 4
    out: str = "thinloop-out"
    emit: tuple = field(default_factory=tuple)

    def __post_init__(self):
        for name in ("eps_geo", "v_min_rel", "theta_tol", "tol_rank", "tol_edge", "tol_group",
                     "tol_holonomy", "tol_factor"):
            if not getattr(self, name) > 0:
                raise ValueError(f"{name} must be positive")
        if self.samples_per_arc < 32:
            raise ValueError("samples_per_arc must be at least 32")
        if self.grid is not None and self.grid < 8:
            raise ValueError("grid must be at least 8")
        if self.connections < 1:
            raise ValueError("connections must be at least 1")
        if not 1 <= self.signature_level <= 5:
            raise ValueError("signature_level must be between 1 and 5")
        emit = tuple(self.emit)
        bad = [e for e in emit if e not in EMIT_CHOICES]
        if bad:
            raise ValueError(f"unknown emit target(s) {bad}; choose from {EMIT_CHOICES}")
        object.__setattr__(self, "emit", emit)

    def updated(self, **kw) -> "RunConfig":
        """Copy with the given fields replaced; None values are ignored."""
        known = {f.name for f in fields(self)}
        unknown = set(kw) - known
        if unknown:
            raise ValueError(f"unknown config field(s) {sorted(unknown)}")
        return replace(self, **{k: v for k, v in kw.items() if v is not None})

    def to_dict(self) -> dict:
        d = asdict(self)
        d["emit"] = list(self.emit)
        return {"format": CONFIG_FORMAT, **d}


def load_config(path, base: Optional[RunConfig] = None) -> RunConfig:
    doc = json.loads(Path(path).read_text())
    if doc.pop("format", CONFIG_FORMAT) != CONFIG_FORMAT:
        raise ValueError(f"{path}: not a {CONFIG_FORMAT} document")
    if "emit" in doc:
        doc["emit"] = tuple(doc["emit"])
    return (base or RunConfig()).updated(**doc)
