"""Command-line front end: ``thinloop <command> ...``.

Curves are given as a path to a ``thinloop-curve/1`` document, as
``word:<letters>`` over the bundled arcs (for example ``word:"p0 p1 p0' p1'"``)
or as ``corpus:<name>``; ``equiv`` and ``crosscheck`` also accept
``constant``.  Settings come from defaults, then ``--config``,
then explicit flags.  Exit status: 0 equivalent (or success), 1 not
equivalent, 2 undecided or resolution failure, 3 bad input.
"""
from __future__ import annotations

import argparse
import json
import sys
from pathlib import Path
from typing import Optional

import numpy as np

from . import __version__
from .battery import EQUIVALENT, NOT_EQUIVALENT, crosscheck
from .config import EMIT_CHOICES, RunConfig, load_config
from .corpus import corpus, spec_from_word
from .curvekit.curves import CurveError, SampledCurve, arclength_table, constant_curve
from .curvekit.decompose import ResolutionError, check_invariants, decompose, default_v_min, word_of
from .curvekit.io import SchemaError, curve_to_dict, dumps, load_connection, load_curve, load_spec
from .curvekit.synth import synth_curve
from .diagrams import curve_svg, nesting_svg
from .holonomy import deviation, get_group, random_connection, signature, transport_many
from .reparam import psi
from .thinhomotopy import check_thin, remove_whiskers
from .treefactor import NotWhiskerError, factorize
from .wordcore import Letter, format_word, is_whisker, parse_word, reduce

EXIT = {EQUIVALENT: 0, NOT_EQUIVALENT: 1}


class InputError(ValueError):
    pass


class _Parser(argparse.ArgumentParser):
    """Usage errors exit 3 so that 2 keeps meaning "undecided"."""

    def error(self, message):
        self.print_usage(sys.stderr)
        self.exit(3, f"{self.prog}: error: {message}\n")


# ---------------------------------------------------------------------------
# helpers

def _curve(arg: str, cfg: RunConfig) -> SampledCurve:
    if arg.startswith("word:"):
        w = parse_word(arg[5:])
        return synth_curve(spec_from_word(w), cfg.samples_per_arc)
    if arg.startswith("corpus:"):
        name = arg[7:]
        for e in corpus():
            if e.name == name:
                return synth_curve(e.spec(), cfg.samples_per_arc)
        raise InputError(f"no corpus entry named {name!r}")
    if not Path(arg).exists():
        raise InputError(f"{arg}: no such file")
    return load_curve(arg, cfg.samples_per_arc)


def _pair(a: str, b: str, cfg: RunConfig) -> tuple[SampledCurve, SampledCurve]:
    """Two curves; ``constant`` stands for the constant curve at the other one's start."""
    if a == "constant" and b == "constant":
        raise InputError("at most one curve may be 'constant'")
    if a == "constant":
        cb = _curve(b, cfg)
        return constant_curve(cb.points[0], 64), cb
    ca = _curve(a, cfg)
    return ca, (constant_curve(ca.points[0], 64) if b == "constant" else _curve(b, cfg))


def _decompose(curve: SampledCurve, cfg: RunConfig):
    return decompose(curve, cfg.eps_geo, default_v_min(curve, cfg.v_min_rel))


def _outdir(cfg: RunConfig) -> Path:
    p = Path(cfg.out)
    p.mkdir(parents=True, exist_ok=True)
    return p


def _matrix_text(U: np.ndarray) -> str:
    def num(z):
        z = complex(z)
        if abs(z.imag) < 1e-15:
            return f"{z.real:+.10f}"
        return f"{z.real:+.10f}{z.imag:+.10f}i"
    return "; ".join(" ".join(num(z) for z in row) for row in np.asarray(U))


# ---------------------------------------------------------------------------
# commands

def cmd_synth(args, cfg: RunConfig) -> int:
    word = args.word
    if word is None and args.spec is not None and args.spec.startswith("word:"):
        word = args.spec[5:]
    if word is not None:
        spec = spec_from_word(parse_word(word))
    elif args.spec is not None:
        if not Path(args.spec).is_file():
            raise InputError(f"{args.spec}: no such file")
        spec = load_spec(args.spec)
        if spec is None:
            raise InputError(f"{args.spec}: document has no traversal")
    else:
        raise InputError("give a spec file or --word")
    curve = synth_curve(spec, cfg.samples_per_arc)
    text = dumps(curve_to_dict(curve, spec))
    if args.output:
        Path(args.output).write_text(text)
        print(f"wrote {args.output} ({curve.n + 1} samples, word {format_word(Letter(*x) for x in spec.traversal)})")
    else:
        sys.stdout.write(text)
    return 0


def cmd_decompose(args, cfg: RunConfig) -> int:
    curve = _curve(args.curve, cfg)
    d = _decompose(curve, cfg)
    w = word_of(d)
    t = curve.params
    print(f"word: {format_word(w) or '(empty)'}")
    print(f"reduced: {format_word(reduce(w)) or '(empty)'}")
    print(f"whisker: {'yes' if is_whisker(w) else 'no'}")
    print("# interval t_start t_end arc direction multiplicity")
    for k, iv in enumerate(d.intervals):
        print(f"{k} {t[iv.start]:.6f} {t[iv.end]:.6f} {iv.arc} {iv.direction:+d} {iv.multiplicity}")
    print("# a0 t_lo t_hi")
    for lo, hi in d.a0:
        print(f"{t[lo]:.6f} {t[hi]:.6f}")
    inv = check_invariants(d)
    print("invariants: " + ", ".join(f"{k}={'ok' if v else 'FAIL'}" for k, v in inv.items()))
    if "tables" in cfg.emit:
        out = _outdir(cfg) / "decomposition.json"
        out.write_text(dumps({"format": "thinloop-decomposition/1", "word": format_word(w),
                              "intervals": [[float(t[iv.start]), float(t[iv.end]), iv.arc, iv.direction,
                                             iv.multiplicity] for iv in d.intervals],
                              "a0": [[float(t[lo]), float(t[hi])] for lo, hi in d.a0]}))
    return 0


def cmd_reduce(args, cfg: RunConfig) -> int:
    w = parse_word(args.word)
    print(format_word(reduce(w)) or "(empty)")
    return 0


def cmd_equiv(args, cfg: RunConfig) -> int:
    rep = crosscheck(*_pair(args.a, args.b, cfg), cfg, routes="a")
    print(rep.route("a").line())
    print(f"verdict: {rep.verdict}")
    return EXIT.get(rep.verdict, 2)


def cmd_tree(args, cfg: RunConfig) -> int:
    curve = _curve(args.curve, cfg)
    d = _decompose(curve, cfg)
    try:
        f = factorize(d, theta_tol=cfg.theta_tol)
    except NotWhiskerError:
        print(f"not a whisker: word {format_word(word_of(d))} reduces to {format_word(reduce(word_of(d)))}")
        return 1
    L = float(arclength_table(curve)[-1])
    print(f"relabelled word: {format_word(f.nesting.word)}")
    if f.fused:
        print("fused corners: " + ", ".join(str(x) for x in f.fused))
    sys.stdout.write(f.tree.edge_list())
    print(f"factor error: {f.factor_error():.3e} (relative {f.factor_error() / max(L, 1e-300):.3e})")
    print(f"fold Lipschitz estimate: {f.lipschitz_estimate(seed=cfg.seed):.6f}")
    if "svg" in cfg.emit:
        out = _outdir(cfg) / "tree.svg"
        out.write_text(nesting_svg(f.nesting, f.tree))
        print(f"wrote {out}")
    return 0


def cmd_contract(args, cfg: RunConfig) -> int:
    curve = _curve(args.curve, cfg)
    d = _decompose(curve, cfg)
    res = remove_whiskers(curve, cfg.eps_geo, cfg.grid, decomp=d, theta_tol=cfg.theta_tol)
    print(f"word: {format_word(res.word) or '(empty)'} -> {format_word(res.reduced) or '(empty)'}")
    print(f"grid: {len(res.grid.t)} x {len(res.grid.r)}")
    for name, g in (("stop at vertices", res.stop), ("contract", res.contraction), ("composite", res.grid)):
        rep = check_thin(g, cfg.tol_rank, cfg.tol_edge, source_points=curve.points, tol_image=cfg.eps_geo)
        print(f"{name}: {rep.summary()}")
    if "frames" in cfg.emit:
        out = _outdir(cfg) / "frames"
        out.mkdir(exist_ok=True)
        cols = np.unique(np.linspace(0, len(res.grid.r) - 1, args.frames).round().astype(int))
        for k, j in enumerate(cols):
            rows = np.column_stack([res.grid.t, res.grid.H[:, j]])
            np.savetxt(out / f"frame_{k:03d}.csv", rows, delimiter=",", fmt="%.10f",
                       header=f"r={res.grid.r[j]:.6f}; columns t,x,y")
        print(f"wrote {len(cols)} frames to {out}")
    if "svg" in cfg.emit:
        out = _outdir(cfg) / "contract.svg"
        out.write_text(curve_svg(curve.points, extra=[res.target.points]))
        print(f"wrote {out}")
    return 0


def cmd_holonomy(args, cfg: RunConfig) -> int:
    curve = _curve(args.curve, cfg)
    if args.connection:
        conns = [load_connection(p) for p in args.connection]
    else:
        g = get_group(cfg.group)
        conns = [random_connection(g, cfg.seed + k, curve.dim) for k in range(cfg.connections)]
    res = transport_many(curve, conns, cfg.steps)
    print("# seed deviation defect U (row-major)")
    for c, r in zip(conns, res):
        print(f"{c.seed} {deviation(r.U):.6e} {r.defect:.1e} {_matrix_text(r.U)}")
    worst = max(float(deviation(r.U)) for r in res)
    print(f"worst: {worst:.6e}")
    return 0


def cmd_signature(args, cfg: RunConfig) -> int:
    curve = _curve(args.curve, cfg)
    S = signature(curve, args.level or cfg.signature_level)
    for k, lev in enumerate(S.levels, start=1):
        flat = " ".join(f"{x:+.12e}" for x in np.asarray(lev).ravel())
        print(f"level {k}: {flat}")
    return 0


def cmd_crosscheck(args, cfg: RunConfig) -> int:
    rep = crosscheck(*_pair(args.a, args.b, cfg), cfg)
    sys.stdout.write(rep.text())
    return EXIT.get(rep.verdict, 2)


def cmd_psi(args, cfg: RunConfig) -> int:
    S = [float(x) for x in args.values]
    p = psi(S)
    x = np.linspace(0, 1, args.points)
    print("# x psi dpsi")
    for a, b, c in zip(x, p(x), p.derivative(x)):
        print(f"{a:.6f} {b:.10f} {c:.10f}")
    return 0


# ---------------------------------------------------------------------------
# parser

def build_parser() -> argparse.ArgumentParser:
    common = argparse.ArgumentParser(add_help=False)
    common.add_argument("--config", help="JSON config file (flags override it)")
    common.add_argument("--tol-geo", type=float, dest="eps_geo", help="geometric identification radius")
    common.add_argument("--grid", type=int, help="homotopy grid columns (default: chosen per curve)")
    common.add_argument("--group", choices=["SU2", "SO3", "SL2R", "U1"])
    common.add_argument("--seed", type=int)
    common.add_argument("--connections", type=int, help="number of random connections")
    common.add_argument("--samples", type=int, dest="samples_per_arc", help="samples per arc when synthesizing")
    common.add_argument("--emit", action="append", choices=EMIT_CHOICES, help="extra outputs (repeatable)")
    common.add_argument("--out", help="output directory")

    p = _Parser(prog="thinloop", description=__doc__.splitlines()[0])
    p.add_argument("--version", action="version", version=f"thinloop {__version__}")
    sub = p.add_subparsers(dest="command", required=True)

    s = sub.add_parser("synth", parents=[common], help="sample a traversal into a curve file")
    s.add_argument("spec", nargs="?", help="curve document with arcs and traversal, or word:<letters>")
    s.add_argument("--word", help="traversal over the bundled arcs instead of a spec file")
    s.add_argument("-o", "--output", help="write here instead of stdout")
    s.set_defaults(func=cmd_synth)

    s = sub.add_parser("decompose", parents=[common], help="arc decomposition and word")
    s.add_argument("curve")
    s.set_defaults(func=cmd_decompose)

    s = sub.add_parser("reduce", parents=[common], help="free reduction of a word")
    s.add_argument("word")
    s.set_defaults(func=cmd_reduce)

    s = sub.add_parser("equiv", parents=[common], help="compare reduced words of two curves")
    s.add_argument("a")
    s.add_argument("b")
    s.set_defaults(func=cmd_equiv)

    s = sub.add_parser("tree", parents=[common], help="tree factorization of a whisker")
    s.add_argument("curve")
    s.set_defaults(func=cmd_tree)

    s = sub.add_parser("contract", parents=[common], help="whisker-removal homotopy and its thinness report")
    s.add_argument("curve")
    s.add_argument("--frames", type=int, default=9, help="number of r-slices to write with --emit frames")
    s.set_defaults(func=cmd_contract)

    s = sub.add_parser("holonomy", parents=[common], help="holonomy table for seeded or given connections")
    s.add_argument("curve")
    s.add_argument("--connection", action="append", help="connection document (repeatable)")
    s.set_defaults(func=cmd_holonomy)

    s = sub.add_parser("signature", parents=[common], help="signature levels of the sample polyline")
    s.add_argument("curve")
    s.add_argument("--level", type=int, choices=range(1, 6))
    s.set_defaults(func=cmd_signature)

    s = sub.add_parser("crosscheck", parents=[common], help="all four equivalence routes")
    s.add_argument("a")
    s.add_argument("b")
    s.set_defaults(func=cmd_crosscheck)

    s = sub.add_parser("psi", parents=[common], help="tabulate the reparametrization psi(S)")
    s.add_argument("values", nargs="*", help="points of S in [0, 1]")
    s.add_argument("--points", type=int, default=11)
    s.set_defaults(func=cmd_psi)
    return p


def resolve_config(args) -> RunConfig:
    cfg = RunConfig()
    if args.config:
        cfg = load_config(args.config, cfg)
    flags = {k: getattr(args, k, None) for k in
             ("eps_geo", "grid", "group", "seed", "connections", "samples_per_arc", "out")}
    if getattr(args, "emit", None):
        flags["emit"] = tuple(args.emit)
    return cfg.updated(**flags)


def main(argv: Optional[list] = None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    try:
        cfg = resolve_config(args)
        return args.func(args, cfg)
    except (InputError, SchemaError, CurveError, json.JSONDecodeError, ValueError) as exc:
        print(f"thinloop: {exc}", file=sys.stderr)
        return 3
    except ResolutionError as exc:
        print(f"thinloop: resolution failure: {exc}", file=sys.stderr)
        return 2
    except BrokenPipeError:
        sys.stderr.close()
        return 0
    except OSError as exc:
        print(f"thinloop: {exc}", file=sys.stderr)
        return 3


if __name__ == "__main__":
    sys.exit(main())
