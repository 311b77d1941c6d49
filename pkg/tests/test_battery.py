import numpy as np
import pytest

from thinloop.battery import (EQUIVALENT, NOT_EQUIVALENT, UNDECIDED, CrosscheckReport, RouteVerdict, battery,
                              crosscheck, loop_of, route_holonomy, route_words)
from thinloop.config import RunConfig
from thinloop.corpus import spec_from_word
from thinloop.curvekit import constant_curve, decompose, synth_curve
from thinloop.wordcore import parse_word


def _synth(word, n=512):
    return synth_curve(spec_from_word(parse_word(word)), n)


def test_report_aggregation():
    a = RouteVerdict("a", EQUIVALENT)
    b = RouteVerdict("b", UNDECIDED, {"minor": 0.5})
    c = RouteVerdict("c", NOT_EQUIVALENT)
    assert CrosscheckReport((a, b), "", "").verdict == EQUIVALENT
    assert CrosscheckReport((a, c), "", "").verdict == UNDECIDED
    assert not CrosscheckReport((a, c), "", "").agree
    assert CrosscheckReport((b,), "", "").verdict == UNDECIDED
    assert b.line() == "route b: undecided (minor=5.000e-01)"


def test_whisker_battery_agrees():
    rep = battery(_synth("s0 t0 t0' v0 v0' s0'"))
    assert [r.verdict for r in rep.routes] == [EQUIVALENT] * 4
    assert rep.reduced == ""


def test_commutator_battery_agrees():
    rep = battery(_synth("p0 p1 p0' p1'"))
    assert [r.verdict for r in rep.routes] == [NOT_EQUIVALENT] * 4
    assert "verdict: not equivalent" in rep.text()


def test_crosscheck_open_curves():
    rep = crosscheck(_synth("s0 t0 t0' v0"), _synth("s0 v0"))
    assert rep.verdict == EQUIVALENT and rep.agree
    assert rep.route("a").detail["first"] == rep.route("a").detail["second"]
    rep = crosscheck(_synth("p0 s0"), _synth("p1 s0"), routes="acd")
    assert rep.verdict == NOT_EQUIVALENT


def test_crosscheck_against_constant():
    comm = _synth("p0 p1 p0' p1'")
    rep = crosscheck(comm, constant_curve(comm.points[0], 64), routes="ad")
    assert rep.verdict == NOT_EQUIVALENT


def test_u1_cannot_see_the_commutator():
    d = decompose(_synth("p0 p1 p0' p1'"))
    cfg = RunConfig(group="U1", connections=5)
    r = route_holonomy(d, cfg)
    # abelian transport is blind here; the tube fallback cannot help either
    assert r.verdict in (EQUIVALENT, UNDECIDED)
    assert r.detail["worst"] < 1e-5


def test_route_words_straddling_split():
    d = decompose(_synth("p0 p1"))
    assert route_words(d, split=0.5).verdict == NOT_EQUIVALENT
    assert route_words(d, split=0.25).verdict == UNDECIDED


def test_loop_of_requires_common_endpoints():
    with pytest.raises(ValueError):
        loop_of(_synth("s0"), _synth("s1"))
    with pytest.raises(ValueError):
        battery(_synth("s0 s0'"), routes="x")
