"""Four independent routes to deciding whether two curves are equivalent.

For curves g1, g2 with common endpoints the routes look at the loop
``g1 . reverse(g2)``:

* ``a`` compares reduced words read off one shared decomposition;
* ``b`` builds the whisker-removal homotopy, certifies it with
  :func:`check_thin` and asks whether it ends at a constant loop;
* ``c`` samples holonomy of random connections, falling back to a tube
  connection that realizes a random word-map value;
* ``d`` factors the loop through a tree.

Each route answers "equivalent", "not equivalent" or "undecided".
"""
from __future__ import annotations

from dataclasses import dataclass, field
from typing import Optional

import numpy as np

from .config import RunConfig
from .curvekit.curves import SampledCurve, arclength_table, concat, reverse
from .curvekit.decompose import ArcDecomposition, ResolutionError, decompose, default_v_min, word_of
from .holonomy import deviation, distinguishing_connection, get_group, holonomy_trivial, transport_many
from .thinhomotopy import ThinnessReport, check_thin, remove_whiskers
from .treefactor import NotWhiskerError, factorize
from .wordcore import format_word, is_whisker, reduce

EQUIVALENT = "equivalent"
NOT_EQUIVALENT = "not equivalent"
UNDECIDED = "undecided"


@dataclass(frozen=True)
class RouteVerdict:
    route: str
    verdict: str
    detail: dict = field(default_factory=dict)

    def line(self) -> str:
        items = ", ".join(f"{k}={_fmt(v)}" for k, v in self.detail.items())
        return f"route {self.route}: {self.verdict}" + (f" ({items})" if items else "")


@dataclass(frozen=True)
class CrosscheckReport:
    routes: tuple
    word: str
    reduced: str

    @property
    def decided(self) -> list:
        return [r.verdict for r in self.routes if r.verdict != UNDECIDED]

    @property
    def agree(self) -> bool:
        return len(set(self.decided)) <= 1

    @property
    def verdict(self) -> str:
        d = self.decided
        if not d or not self.agree:
            return UNDECIDED
        return d[0]

    def route(self, name: str) -> RouteVerdict:
        return next(r for r in self.routes if r.route == name)

    def text(self) -> str:
        lines = [f"loop word: {self.word or '(empty)'}", f"reduced: {self.reduced or '(empty)'}"]
        lines += [r.line() for r in self.routes]
        lines.append(f"agreement: {'yes' if self.agree else 'NO'}")
        lines.append(f"verdict: {self.verdict}")
        return "\n".join(lines) + "\n"


def _fmt(v) -> str:
    if isinstance(v, float):
        return f"{v:.3e}"
    return str(v)


def _verdict(ok: bool) -> str:
    return EQUIVALENT if ok else NOT_EQUIVALENT


def _decompose(curve: SampledCurve, cfg: RunConfig) -> ArcDecomposition:
    return decompose(curve, cfg.eps_geo, default_v_min(curve, cfg.v_min_rel))


def route_words(decomp: ArcDecomposition, split: Optional[float] = None) -> RouteVerdict:
    """Route a: reduced words of the two halves (or of the loop against the empty word)."""
    w = word_of(decomp)
    if split is None:
        return RouteVerdict("a", _verdict(is_whisker(w)), {"reduced": format_word(reduce(w)) or "(empty)"})
    t = decomp.curve.params
    first = tuple(iv.letter for iv in decomp.intervals if t[iv.end] <= split + 1e-12)
    second = tuple(iv.letter for iv in decomp.intervals if t[iv.start] >= split - 1e-12)
    if len(first) + len(second) != len(w):
        return RouteVerdict("a", UNDECIDED, {"reason": "an arc straddles the junction"})
    w1 = reduce(first)
    w2 = reduce(tuple(x.inverse() for x in reversed(second)))
    return RouteVerdict("a", _verdict(w1 == w2), {"first": format_word(w1) or "(empty)",
                                                  "second": format_word(w2) or "(empty)"})


def route_thin(decomp: ArcDecomposition, cfg: RunConfig) -> tuple[RouteVerdict, ThinnessReport]:
    """Route b: whisker removal certified thin; equivalent iff it ends at a constant loop."""
    curve = decomp.curve
    res = remove_whiskers(curve, cfg.eps_geo, cfg.grid, decomp=decomp, theta_tol=cfg.theta_tol)
    rep = check_thin(res.grid, cfg.tol_rank, cfg.tol_edge, source_points=curve.points, tol_image=cfg.eps_geo)
    spread = float(np.max(np.linalg.norm(res.target.points - res.target.points[0], axis=1)))
    try:
        end_word = word_of(decompose(res.target, cfg.eps_geo))
    except ResolutionError:
        end_word = None
    detail = {"thin": rep.passed, "minor": rep.max_minor, "edge": rep.max_edge_partial,
              "end_spread": spread}
    if not rep.passed or end_word is None:
        return RouteVerdict("b", UNDECIDED, detail), rep
    constant = len(end_word) == 0 and spread <= cfg.eps_geo
    detail["end_word"] = format_word(end_word) or "(empty)"
    return RouteVerdict("b", _verdict(constant), detail), rep


def route_holonomy(decomp: ArcDecomposition, cfg: RunConfig, group: Optional[str] = None,
                   strong: float = 1e-2) -> RouteVerdict:
    """Route c: trivial for every sampled connection, or visibly nontrivial for one."""
    curve = decomp.curve
    g = get_group(group or cfg.group)
    v = holonomy_trivial(curve, g, cfg.connections, cfg.seed, cfg.tol_holonomy, cfg.steps)
    detail = {"group": g.name, "worst": v.worst}
    if v.trivial:
        return RouteVerdict("c", EQUIVALENT, detail)
    if v.worst > strong:
        return RouteVerdict("c", NOT_EQUIVALENT, detail)
    # weak signal: try the constructive tube connection
    rng = np.random.default_rng(cfg.seed)
    target = {a: g.random_element(rng) for a in decomp.arcs}
    try:
        conn = distinguishing_connection(curve, decomp, g, target)
    except ValueError:
        return RouteVerdict("c", UNDECIDED, detail)
    tube = float(deviation(transport_many(curve, [conn], cfg.steps)[0].U))
    detail["tube"] = tube
    return RouteVerdict("c", NOT_EQUIVALENT if tube > strong else UNDECIDED, detail)


def route_tree(decomp: ArcDecomposition, cfg: RunConfig, lipschitz_tol: float = 1.01) -> RouteVerdict:
    """Route d: a tree factorization within tolerance."""
    try:
        fact = factorize(decomp, theta_tol=cfg.theta_tol)
    except NotWhiskerError:
        return RouteVerdict("d", NOT_EQUIVALENT, {"tree": "none"})
    L = float(arclength_table(decomp.curve)[-1])
    err = fact.factor_error()
    lip = fact.lipschitz_estimate(seed=cfg.seed)
    ok = err <= cfg.tol_factor * max(L, 1e-300) and lip <= lipschitz_tol and fact.tree.is_tree()
    detail = {"edges": len(fact.tree.edges), "error": err, "lipschitz": lip}
    return RouteVerdict("d", EQUIVALENT if ok else UNDECIDED, detail)


def battery(curve: SampledCurve, cfg: Optional[RunConfig] = None, split: Optional[float] = None,
            routes: str = "abcd", decomp: Optional[ArcDecomposition] = None) -> CrosscheckReport:
    """Run the chosen routes on one loop (null-homotopy question)."""
    cfg = cfg or RunConfig()
    decomp = decomp if decomp is not None else _decompose(curve, cfg)
    w = word_of(decomp)
    out = []
    for r in routes:
        if r == "a":
            out.append(route_words(decomp, split))
        elif r == "b":
            out.append(route_thin(decomp, cfg)[0])
        elif r == "c":
            out.append(route_holonomy(decomp, cfg))
        elif r == "d":
            out.append(route_tree(decomp, cfg))
        else:
            raise ValueError(f"unknown route {r!r}")
    return CrosscheckReport(tuple(out), format_word(w), format_word(reduce(w)))


def loop_of(c1: SampledCurve, c2: SampledCurve, tol: float = 1e-9) -> SampledCurve:
    """c1 followed by c2 backwards."""
    return concat(c1, reverse(c2), tol=tol)


def crosscheck(c1: SampledCurve, c2: SampledCurve, cfg: Optional[RunConfig] = None,
               routes: str = "abcd") -> CrosscheckReport:
    """Decide equivalence of two curves with common endpoints along every route."""
    loop = loop_of(c1, c2)
    return battery(loop, cfg, split=0.5, routes=routes)
