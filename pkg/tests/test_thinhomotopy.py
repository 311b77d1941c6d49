import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from oracles import relative_minor_dense
from thinloop.corpus import spec_from_word
from thinloop.curvekit import decompose, synth_curve, word_of
from thinloop.reparam import bump
from thinloop.thinhomotopy import (HomotopyGrid, check_thin, constant_grid, contract_tree, contract_whisker,
                                   glue_and_halt, partial, ramp, remove_whiskers, vanish_at_vertices,
                                   whisker_blocks)
from thinloop.treefactor import NotWhiskerError, factorize
from thinloop.wordcore import canonical_relabel, parse_word, reduce, reduction_survivors

words = st.lists(st.sampled_from(parse_word("a a' b b'")), max_size=20).map(tuple)


def _synth(word, n=512):
    return synth_curve(spec_from_word(parse_word(word)), n)


def _folded_grid(n_t=1001, n_r=401):
    """H(t, r) = c(s(t, r)) on a circle: rank one, pinned ends, flat r-edges."""
    t = np.linspace(0, 1, n_t)
    r = np.linspace(0, 1, n_r)
    T, R = np.meshgrid(t, r, indexing="ij")
    s = bump(T) * (1 - 0.5 * bump(R) * np.sin(np.pi * T) ** 2)
    H = np.stack([np.cos(2 * s), np.sin(2 * s)], axis=-1)
    return HomotopyGrid(t, r, H)


def test_partial_is_fourth_order():
    errs = []
    for n in (101, 201):
        x = np.linspace(0, 1, n)
        F = np.sin(3 * x)[:, None] * np.ones((1, 3))
        errs.append(np.max(np.abs(partial(F, x, 0)[3:-3] - 3 * np.cos(3 * x)[3:-3, None])))
    assert errs[1] < errs[0] / 12
    x = np.sort(np.random.default_rng(0).random(50))
    assert np.allclose(partial(x**2, x, 0), 2 * x, atol=1e-10)


def test_ramp_and_bump_shapes():
    u = np.linspace(0, 1, 1001)
    v = ramp(u)
    assert v[0] == 0 and v[-1] == pytest.approx(1.0)
    assert np.all(np.diff(v) >= 0)
    d = np.gradient(v, u)
    assert abs(d[0]) < 1e-2 and abs(d[-1]) < 1e-2
    assert np.allclose(d[200:800], 1 / 0.9)


def test_rank_one_grid_is_thin():
    g = _folded_grid()
    rep = check_thin(g, source_points=g.source, tol_image=0.02)
    assert rep.passed, rep.summary()
    assert rep.max_minor < 1e-6


def test_two_parameter_grid_is_not_thin():
    t = np.linspace(0, 1, 101)
    r = np.linspace(0, 1, 81)
    T, R = np.meshgrid(t, r, indexing="ij")
    H = np.stack([bump(T), bump(R) * np.sin(np.pi * T) ** 2], axis=-1)
    rep = check_thin(HomotopyGrid(t, r, H))
    assert not rep.passed and rep.max_minor > 0.1
    assert rep.max_minor == pytest.approx(relative_minor_dense(t, r, H), rel=0.05)


@given(st.integers(0, 10**6))
@settings(max_examples=20, deadline=None)
def test_minor_matches_dense_oracle(seed):
    rng = np.random.default_rng(seed)
    t = np.linspace(0, 1, 64)
    r = np.linspace(0, 1, 48)
    T, R = np.meshgrid(t, r, indexing="ij")
    a, b, c = rng.normal(size=3)
    H = np.stack([np.sin(T + a * R), np.cos(b * T * R) + c * R ** 2], axis=-1)
    rep = check_thin(HomotopyGrid(t, r, H))
    assert rep.max_minor == pytest.approx(relative_minor_dense(t, r, H), rel=0.05, abs=1e-4)


def test_edge_and_image_failures_are_reported():
    g = _folded_grid()
    moved = HomotopyGrid(g.t, g.r, g.H + 0.01 * g.r[None, :, None])
    rep = check_thin(moved, source_points=g.source, tol_image=0.005)
    assert not rep.boundary_exact
    assert rep.edge_partials["dH/dr at r=0"] > 1e-3
    assert rep.containment > 0.005
    assert not rep.passed


def test_chunked_rows_match_dense_oracle():
    t = np.linspace(0, 1, 3001)  # several row chunks at this width
    r = np.linspace(0, 1, 801)
    T, R = np.meshgrid(t, r, indexing="ij")
    H = np.stack([np.sin(2 * T + R), np.cos(T * R) + R ** 2], axis=-1)
    rep = check_thin(HomotopyGrid(t, r, H))
    assert rep.max_minor == pytest.approx(relative_minor_dense(t, r, H), rel=1e-3)


def test_grid_helpers():
    c = _synth("s0 s0'", 64)
    k = constant_grid(c, 16)
    assert check_thin(k).max_minor == 0.0
    g = _folded_grid()
    both = g.then(glue_and_halt(HomotopyGrid(g.t, g.r, g.H[:, ::-1])))
    assert np.array_equal(both.source, g.source) and np.allclose(both.target, g.source)
    with pytest.raises(ValueError):
        g.then(k)
    with pytest.raises(ValueError):
        HomotopyGrid(g.t, g.r[:3], g.H[:, :3])


@given(words)
def test_whisker_blocks_cover_cancelled_letters(w):
    blocks = whisker_blocks(w)
    covered = sorted(i for a, b in blocks for i in range(a, b))
    assert covered == sorted(set(range(len(w))) - set(reduction_survivors(w)))
    for a, b in blocks:
        assert reduce(w[a:b]) == ()


@pytest.mark.parametrize("word", ["s0 s0'", "s0 t0 t0' v0 v0' s0'", "p0 p1 p1' p0'", "s1 u0 u0' s1'"])
def test_contract_whisker_is_thin(word):
    c = _synth(word)
    res = contract_whisker(c)
    for g in (res.stop, res.contraction, res.grid):
        rep = check_thin(g, source_points=c.points, tol_image=0.01)
        assert rep.passed, (g.tag, rep.summary())
    assert np.max(np.linalg.norm(res.target.points - c.points[0], axis=1)) < 1e-12


@pytest.mark.parametrize("word,reduced", [("s0 t0 t0' v0", "s0 v0"), ("p0 s1 s1' p1", "p0 p1"),
                                          ("p2 s3 s3' p3 p2' p3'", "p2 p3 p2' p3'")])
def test_remove_whiskers_keeps_the_reduced_word(word, reduced):
    c = _synth(word)
    res = remove_whiskers(c)
    rep = check_thin(res.grid, source_points=c.points, tol_image=0.01)
    assert rep.passed, rep.summary()
    end = decompose(res.target)
    assert len(word_of(end)) == len(parse_word(reduced))
    assert canonical_relabel(res.reduced) == canonical_relabel(reduce(parse_word(word)))


def test_contract_whisker_rejects_non_whiskers():
    with pytest.raises(NotWhiskerError):
        contract_whisker(_synth("p0 p1 p0' p1'"))


def test_step_two_and_three_separately():
    c = _synth("s0 t0 t0' s0'")
    d = decompose(c)
    f = factorize(d)
    stop = vanish_at_vertices(d, f, n_r=128)
    assert check_thin(stop.grid, source_points=c.points, tol_image=0.01).passed
    tree = contract_tree(f)
    rep = check_thin(tree, source_points=c.points, tol_image=0.01)
    assert rep.passed, rep.summary()
    assert np.max(np.linalg.norm(tree.target - f.root_point, axis=1)) < 1e-12
