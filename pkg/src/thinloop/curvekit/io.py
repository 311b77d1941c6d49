"""Versioned JSON text formats for curves and connections.

Curve documents (``"format": "thinloop-curve/1"``) hold ``dim`` and either
``arcs`` plus ``traversal`` (a synthesis input, optional ``dwell`` and
``base``) or raw ``samples`` (``params``, ``points``, ``tangents``), or both.
Connection documents (``"format": "thinloop-connection/1"``) name a group and
give either a ``seed`` or explicit ``basis`` and ``coeffs``.  All numbers are
plain decimals.
"""
from __future__ import annotations

import json
from pathlib import Path
from typing import Optional, Union

import numpy as np

from .curves import CurveError, CurveSpec, SampledCurve
from .synth import synth_curve

CURVE_FORMAT = "thinloop-curve/1"
CONNECTION_FORMAT = "thinloop-connection/1"

PathLike = Union[str, Path]


class SchemaError(ValueError):
    """A document does not follow the expected format."""


def _floats(a) -> list:
    return np.asarray(a, dtype=float).tolist()


def spec_to_dict(spec: CurveSpec) -> dict:
    doc = {
        "format": CURVE_FORMAT,
        "dim": spec.dim,
        "arcs": [{"id": k, "points": _floats(a.points)} for k, a in spec.arcs.items()],
        "traversal": [{"id": a, "direction": d} for a, d in spec.traversal],
    }
    if spec.dwell is not None:
        doc["dwell"] = list(spec.dwell)
    if spec.base is not None:
        doc["base"] = _floats(spec.base)
    return doc


def curve_to_dict(curve: SampledCurve, spec: Optional[CurveSpec] = None) -> dict:
    doc = spec_to_dict(spec) if spec is not None else {"format": CURVE_FORMAT, "dim": curve.dim}
    doc["samples"] = {
        "params": _floats(curve.params),
        "points": _floats(curve.points),
        "tangents": _floats(curve.tangents),
    }
    return doc


def _require(doc: dict, key: str, kind=None):
    if key not in doc:
        raise SchemaError(f"missing field {key!r}")
    val = doc[key]
    if kind is not None and not isinstance(val, kind):
        raise SchemaError(f"field {key!r} must be {kind.__name__}")
    return val


def _check_format(doc, expected: str) -> None:
    if not isinstance(doc, dict):
        raise SchemaError("document must be a JSON object")
    fmt = doc.get("format")
    if fmt != expected:
        raise SchemaError(f"expected format {expected!r}, got {fmt!r}")


def spec_from_dict(doc: dict) -> Optional[CurveSpec]:
    """The synthesis input of a curve document, or None if it only has samples."""
    _check_format(doc, CURVE_FORMAT)
    dim = _require(doc, "dim", int)
    if "traversal" not in doc:
        return None
    arcs = {}
    for a in _require(doc, "arcs", list):
        pts = np.asarray(_require(a, "points", list), dtype=float)
        if pts.ndim != 2 or pts.shape[1] != dim:
            raise SchemaError(f"arc {a.get('id')!r}: points must be a list of {dim}-vectors")
        arcs[str(_require(a, "id"))] = pts
    trav = []
    for e in _require(doc, "traversal", list):
        d = int(_require(e, "direction"))
        if d not in (1, -1):
            raise SchemaError("traversal directions must be 1 or -1")
        trav.append((str(_require(e, "id")), d))
    spec = CurveSpec(arcs, tuple(trav), doc.get("dwell"), tuple(doc["base"]) if "base" in doc else None)
    try:
        spec.validate()
    except CurveError as exc:
        raise SchemaError(str(exc)) from exc
    return spec


def curve_from_dict(doc: dict, samples_per_arc: int = 512) -> SampledCurve:
    """Raw samples when present, otherwise the synthesized traversal."""
    _check_format(doc, CURVE_FORMAT)
    if "samples" in doc:
        s = doc["samples"]
        try:
            curve = SampledCurve(np.asarray(_require(s, "params"), dtype=float),
                                 np.asarray(_require(s, "points"), dtype=float),
                                 np.asarray(_require(s, "tangents"), dtype=float))
        except CurveError as exc:
            raise SchemaError(str(exc)) from exc
        spec = spec_from_dict(doc)
        if spec is not None:
            curve = SampledCurve(curve.params, curve.points, curve.tangents, spec.traversal)
        return curve
    spec = spec_from_dict(doc)
    if spec is None:
        raise SchemaError("curve document needs a traversal or samples")
    return synth_curve(spec, samples_per_arc)


def dumps(doc: dict) -> str:
    return json.dumps(doc, indent=1, sort_keys=True) + "\n"


def save_curve(path: PathLike, curve: Optional[SampledCurve] = None, spec: Optional[CurveSpec] = None) -> None:
    if curve is None and spec is None:
        raise ValueError("nothing to save")
    doc = curve_to_dict(curve, spec) if curve is not None else spec_to_dict(spec)
    Path(path).write_text(dumps(doc))


def load_document(path: PathLike) -> dict:
    try:
        return json.loads(Path(path).read_text())
    except json.JSONDecodeError as exc:
        raise SchemaError(f"{path}: not valid JSON ({exc})") from exc


def load_curve(path: PathLike, samples_per_arc: int = 512) -> SampledCurve:
    return curve_from_dict(load_document(path), samples_per_arc)


def load_spec(path: PathLike) -> Optional[CurveSpec]:
    return spec_from_dict(load_document(path))


# connections -----------------------------------------------------------------

def connection_to_dict(conn) -> dict:
    doc = {"format": CONNECTION_FORMAT, "group": conn.group.name, "dim": conn.basis.dim}
    if conn.seed is not None:
        doc["seed"] = int(conn.seed)
    doc["basis"] = {"degree": conn.basis.degree, "freqs": _floats(conn.basis.freqs),
                    "phases": _floats(conn.basis.phases)}
    doc["coeffs"] = _floats(conn.coeffs)
    return doc


def connection_from_dict(doc: dict):
    from ..holonomy import ConnectionField, FeatureBasis, get_group, random_connection

    _check_format(doc, CONNECTION_FORMAT)
    try:
        group = get_group(_require(doc, "group", str))
    except ValueError as exc:
        raise SchemaError(str(exc)) from exc
    dim = int(doc.get("dim", 2))
    if "coeffs" not in doc:
        return random_connection(group, int(_require(doc, "seed")), dim)
    b = _require(doc, "basis", dict)
    basis = FeatureBasis(dim, int(_require(b, "degree")), np.asarray(b.get("freqs", []), dtype=float).reshape(-1, dim),
                         np.asarray(b.get("phases", []), dtype=float))
    coeffs = np.asarray(doc["coeffs"], dtype=float)
    if coeffs.shape != (dim, basis.size, group.n_basis):
        raise SchemaError(f"coeffs must have shape {(dim, basis.size, group.n_basis)}, got {coeffs.shape}")
    return ConnectionField(group, basis, coeffs, doc.get("seed"))


def save_connection(path: PathLike, conn) -> None:
    Path(path).write_text(dumps(connection_to_dict(conn)))


def load_connection(path: PathLike):
    return connection_from_dict(load_document(path))
