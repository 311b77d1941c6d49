"""End-to-end acceptance criteria.

Each test prints one ``[PASS]``/``[FAIL]`` line; the lines are repeated in
the pytest terminal summary.  Run directly (``python tests/test_acceptance.py``)
to get just the eight lines.
"""
import functools
import random
import sys
import time
from pathlib import Path

import numpy as np
import pytest

sys.path.insert(0, str(Path(__file__).parent))

from conftest import ACCEPTANCE_LINES  # noqa: E402
from oracles import (canonical_codes, cluster, decode, grid_critical_values, pad_codes,  # noqa: E402
                     rewrite_random, rewrite_random_array, shoelace, SYMBOLS)
from thinloop.battery import EQUIVALENT, NOT_EQUIVALENT, battery  # noqa: E402
from thinloop.config import RunConfig  # noqa: E402
from thinloop.corpus import corpus, unit_square  # noqa: E402
from thinloop.curvekit import (arclength_table, compose, concat, decompose, reverse, synth_curve,  # noqa: E402
                               word_of)
from thinloop.holonomy import (GROUPS, get_group, holonomy_trivial, iterated_integrals_with_forms,  # noqa: E402
                               random_connection, random_form, richardson_order, signature, transport_many)
from thinloop.reparam import psi  # noqa: E402
from thinloop.thinhomotopy import check_thin, contract_tree, remove_whiskers, vanish_at_vertices  # noqa: E402
from thinloop.treefactor import factorize  # noqa: E402
from thinloop.wordcore import canonical_relabel, nesting_pairing, reduce  # noqa: E402

pytestmark = [pytest.mark.acceptance, pytest.mark.slow]

SAMPLES = 512
EPS = 0.01


def criterion(number: int, title: str, limit: float = None):
    """Time the check, record a PASS/FAIL line and re-raise failures."""
    def wrap(fn):
        @functools.wraps(fn)
        def run(*a, **kw):
            t0 = time.perf_counter()
            detail, ok, err = "", False, None
            try:
                detail = fn(*a, **kw) or ""
                ok = True
            except AssertionError as exc:
                err = exc
                detail = str(exc).splitlines()[0] if str(exc) else "assertion failed"
            dt = time.perf_counter() - t0
            if ok and limit is not None and dt > limit:
                ok = False
                err = AssertionError(f"runtime {dt:.1f} s over the {limit:.0f} s limit")
            line = f"[{'PASS' if ok else 'FAIL'}] {number}. {title}: {detail} ({dt:.1f} s)"
            ACCEPTANCE_LINES[number] = line
            print(line)
            if err is not None:
                raise err
        return run
    return wrap


@functools.lru_cache(maxsize=None)
def _curves():
    return {e.name: (e, synth_curve(e.spec(), SAMPLES)) for e in corpus()}


def _loops():
    return [(e, c) for e, c in _curves().values() if e.loop]


@criterion(1, "word engine", limit=60)
def test_word_engine():
    codes = canonical_codes(10)
    ref = rewrite_random_array(pad_codes(codes, 10), seed=11)
    for w, r in zip(codes, ref):
        word = decode(w)
        red = reduce(word)
        assert red == decode(r), f"reduce disagrees with rewriting on {w}"
        assert (nesting_pairing(word) is not None) == (not red), f"pairing test disagrees on {w}"
    rng = random.Random(12)
    for _ in range(10_000):
        w = tuple(rng.choice(SYMBOLS) for _ in range(rng.randint(11, 60)))
        red = reduce(w)
        assert red == rewrite_random(w, rng)
        assert (nesting_pairing(w) is not None) == (not red)
    return f"{len(codes)} canonical words up to length 10 and 10000 random words agree"


@criterion(2, "decomposition round trip", limit=120)
def test_round_trip():
    entries = corpus()
    assert len(entries) >= 30
    bad = []
    for e in entries:
        c = synth_curve(e.spec(), SAMPLES)
        if canonical_relabel(word_of(decompose(c, EPS))) != canonical_relabel(e.word):
            bad.append(e.name)
    assert not bad, f"words not recovered: {bad}"
    return f"{len(entries)}/{len(entries)} curves recover their word"


@criterion(3, "equivalence battery on corpus loops", limit=600)
def test_battery_agreement():
    cfg = RunConfig()
    rows = []
    for e, c in _loops():
        rep = battery(c, cfg)
        want = EQUIVALENT if not reduce(e.word) else NOT_EQUIVALENT
        verdicts = {r.route: r.verdict for r in rep.routes}
        assert all(verdicts[k] == want for k in "abd"), f"{e.name}: {verdicts}"
        c_route = rep.route("c")
        if want == EQUIVALENT:
            assert c_route.detail["worst"] <= 1e-5, f"{e.name}: holonomy {c_route.detail['worst']:.2e}"
        else:
            strongest = max(c_route.detail["worst"], c_route.detail.get("tube", 0.0))
            assert strongest > 1e-2, f"{e.name}: holonomy only {strongest:.2e}"
        assert verdicts["c"] == want, f"{e.name}: route c {verdicts['c']}"
        rows.append(e.name)
    return f"all four routes agree on {len(rows)} loops"


@criterion(4, "abelian counter-model")
def test_commutator_counter_model():
    _, c = _curves()["commutator"]
    u1 = holonomy_trivial(c, "U1", n_conn=50, seed=0)
    su2 = holonomy_trivial(c, "SU2", n_conn=20, seed=0)
    assert u1.worst <= 1e-5, f"U1 worst {u1.worst:.2e}"
    assert su2.worst > 1e-2, f"SU2 worst {su2.worst:.2e}"
    return f"U1 worst {u1.worst:.1e} over 50 seeds, SU2 worst {su2.worst:.3f}"


@criterion(5, "psi reparametrizations")
def test_psi_maps():
    rng = np.random.default_rng(5)
    worst_slope = 0.0
    for _ in range(20):
        S = rng.random(rng.integers(0, 9))
        p = psi(S)
        x = np.linspace(0, 1, 2**16 + 1)
        y = p(x)
        assert y[0] == 0.0 and y[-1] == 1.0 and np.all(np.diff(y) >= 0), "not a monotone surjection"
        got = grid_critical_values(p)
        want = cluster(np.concatenate([[0.0, 1.0], S]), 1e-4)
        assert got.shape == want.shape and np.max(np.abs(got - want)) <= 1e-4, "critical values differ"
        jumps = []
        for n in (2**12, 2**13):
            xs = np.linspace(0, 1, n + 1)
            jumps.append(np.max(np.abs(np.diff(np.gradient(p(xs), xs, edge_order=2)))))
        assert jumps[1] < 0.6 * jumps[0], "derivative jump does not shrink with resolution"
        slope = float(np.max(np.abs(np.gradient(y, x, edge_order=2))))
        assert slope <= 4.0, f"sup |psi'| = {slope}"
        worst_slope = max(worst_slope, slope)
    return f"20 sets pass, largest sup|psi'| {worst_slope:.3f}"


@criterion(6, "thinness of the constructions")
def test_construction_thinness():
    grids = 0
    worst = [0.0, 0.0, 0.0]
    for e, c in _curves().values():
        d = decompose(c, EPS)
        res = remove_whiskers(c, EPS, decomp=d)
        todo = [res.stop, res.contraction, res.grid]
        if e.loop and not reduce(e.word):
            f = factorize(d)
            todo += [vanish_at_vertices(d, f).grid, contract_tree(f)]
        for g in todo:
            rep = check_thin(g, 1e-3, 1e-6, source_points=c.points, tol_image=EPS)
            assert rep.passed, f"{e.name} {g.tag}: {rep.summary()}"
            worst = [max(worst[0], rep.max_minor), max(worst[1], rep.max_edge_partial),
                     max(worst[2], rep.containment)]
            grids += 1
    return (f"{grids} grids pass; worst minor {worst[0]:.1e}, edge partial {worst[1]:.1e}, "
            f"image distance {worst[2]:.1e}")


@criterion(7, "holonomy algebra")
def test_holonomy_algebra():
    curves = _curves()
    loops = [c for e, c in curves.values() if e.loop]
    starts_at_base = [c for e, c in curves.values() if np.linalg.norm(c.points[0] - loops[0].points[0]) < 1e-12]
    rng = np.random.default_rng(7)
    names = sorted(GROUPS)
    worst_comp = worst_inv = worst_defect = 0.0
    for k in range(100):
        g = get_group(names[k % len(names)])
        c1 = loops[rng.integers(len(loops))]
        c2 = starts_at_base[rng.integers(len(starts_at_base))]
        conn = random_connection(g, int(rng.integers(1 << 30)))
        U1, U2, U12, Ur = (r.U for r in (transport_many(x, [conn])[0]
                                         for x in (c1, c2, concat(c1, c2), reverse(c1))))
        worst_comp = max(worst_comp, float(np.linalg.norm(U12 - U2 @ U1)))
        worst_inv = max(worst_inv, float(np.linalg.norm(Ur @ U1 - np.eye(g.dim))))
        worst_defect = max(worst_defect, *(g.defect(U) for U in (U1, U2, U12, Ur)))
    assert worst_comp <= 1e-6 and worst_inv <= 1e-6, f"composition {worst_comp:.1e}, inverse {worst_inv:.1e}"
    assert worst_defect <= 1e-8, f"defect {worst_defect:.1e}"
    worst_rep = 0.0
    for name in ("figure_eight", "commutator", "nested_petals"):
        c = curves[name][1]
        conn = random_connection(get_group("SU2"), 3)
        U = transport_many(c, [conn])[0].U
        for S in ([0.5], [0.2, 0.4, 0.9], rng.random(8)):
            V = transport_many(compose(c, psi(S)), [conn])[0].U
            worst_rep = max(worst_rep, float(np.linalg.norm(U - V)))
    assert worst_rep <= 1e-6, f"reparametrization {worst_rep:.1e}"
    order = richardson_order(synth_curve(curves["figure_eight"][0].spec(), 64),
                             random_connection(get_group("SU2"), 1), 64)
    assert order >= 3.5, f"order {order:.2f}"
    return (f"composition {worst_comp:.1e}, inverse {worst_inv:.1e}, reparametrization {worst_rep:.1e}, "
            f"defect {worst_defect:.1e}, order {order:.2f}")


@criterion(8, "signatures and iterated integrals")
def test_signatures():
    whiskers = [c for e, c in _loops() if not reduce(e.word)]
    worst_sig = max(signature(c, 4).max_abs() for c in whiskers)
    assert worst_sig <= 1e-9, f"whisker signature {worst_sig:.1e}"
    sq = unit_square()
    area = signature(sq, 2).antisymmetric_area()
    assert abs(area - 1.0) <= 1e-9 and abs(area - shoelace(sq)) <= 1e-12, f"area {area}"
    worst_ii = 0.0
    for j, c in enumerate(whiskers):
        for depth in (1, 2, 3):
            forms = [random_form(100 * j + 10 * depth + k) for k in range(depth)]
            worst_ii = max(worst_ii, abs(iterated_integrals_with_forms(c, forms)))
    assert worst_ii <= 1e-6, f"iterated integrals {worst_ii:.1e}"
    return (f"{len(whiskers)} whiskers: signature {worst_sig:.1e}, iterated integrals {worst_ii:.1e}; "
            f"square area error {abs(area - 1):.1e}")


if __name__ == "__main__":
    failures = 0
    for fn in (test_word_engine, test_round_trip, test_battery_agreement, test_commutator_counter_model,
               test_psi_maps, test_construction_thinness, test_holonomy_algebra, test_signatures):
        try:
            fn()
        except AssertionError:
            failures += 1
    sys.exit(1 if failures else 0)
