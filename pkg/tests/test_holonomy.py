import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from oracles import (expm_taylor, iterated_integral_2_bruteforce, shoelace, signature_level2_bruteforce,
                     transport_euler_product)
from thinloop.corpus import spec_from_word, unit_square
from thinloop.curvekit import (CurveError, SampledCurve, compose, concat, constant_curve, decompose, reverse,
                               synth_curve)
from thinloop.holonomy import (GROUPS, OneForm, deviation, distinguishing_connection, get_group, holonomy_trivial,
                               iterated_integrals_with_forms, line_integral, random_connection, random_form,
                               richardson_order, signature, transport, transport_many, tube_transport,
                               word_map_eval, zero_connection)
from thinloop.reparam import psi
from thinloop.thinhomotopy import remove_whiskers
from thinloop.wordcore import parse_word

group_names = st.sampled_from(sorted(GROUPS))


def _synth(word, n=512):
    return synth_curve(spec_from_word(parse_word(word)), n)


def _algebra_element(g, rng, scale=1.0):
    return np.einsum("b,bij->ij", rng.uniform(-scale, scale, g.n_basis), g.basis_array)


@given(group_names, st.integers(0, 10**6), st.floats(0.01, 3.0))
@settings(deadline=None)
def test_exp_matches_taylor_oracle(name, seed, scale):
    g = get_group(name)
    X = _algebra_element(g, np.random.default_rng(seed), scale)
    assert g.in_algebra(X)
    E = g.exp(X)
    assert np.allclose(E, expm_taylor(X), atol=1e-11)
    assert g.defect(E) < 1e-12


@given(group_names, st.integers(0, 10**6))
@settings(deadline=None)
def test_log_inverts_exp_and_project_is_idempotent(name, seed):
    g = get_group(name)
    rng = np.random.default_rng(seed)
    X = _algebra_element(g, rng, 0.8)
    assert np.allclose(g.exp(g.log(g.exp(X))), g.exp(X), atol=1e-10)
    U = g.random_element(rng)
    assert g.defect(U) < 1e-12
    noisy = U + 1e-4 * rng.normal(size=U.shape)
    P = g.project(noisy)
    assert g.defect(P) < 1e-12
    assert np.allclose(g.project(P), P, atol=1e-13)
    assert np.linalg.norm(P - U) < 1e-3


def test_unknown_group():
    with pytest.raises(ValueError):
        get_group("E8")


@pytest.mark.parametrize("name", ["SU2", "SO3", "SL2R"])
def test_transport_matches_product_oracle(name):
    c = _synth("p0 p1'", 256)
    conn = random_connection(get_group(name), 3)
    U = transport(c, conn).U
    X, _ = c.evaluate(np.linspace(0, 1, 6001))
    ref = transport_euler_product(X, lambda x: conn.matrices(x[None])[0])
    assert np.linalg.norm(U - ref) < 1e-4


def test_u1_transport_is_exponential_of_line_integral():
    c = _synth("p0 s0 s0'", 256)
    conn = random_connection(get_group("U1"), 9)
    U = transport(c, conn).U
    w = OneForm(conn.basis, conn.coeffs[:, :, 0])
    assert U[0, 0] == pytest.approx(np.exp(1j * line_integral(c, w, 200001)), abs=1e-7)


def test_zero_connection_is_identity():
    r = transport(_synth("p0"), zero_connection("SO3"))
    assert np.allclose(r.U, np.eye(3))


@pytest.mark.parametrize("name", sorted(GROUPS))
def test_composition_inverse_and_defect(name):
    g = get_group(name)
    c1 = _synth("p0 s0 s0'", 256)
    c2 = _synth("p1 p2", 256)
    for seed in range(5):
        conn = random_connection(g, seed)
        U1, U2 = transport(c1, conn).U, transport(c2, conn).U
        both = transport(concat(c1, c2), conn)
        assert np.linalg.norm(both.U - U2 @ U1) < 1e-6
        back = transport(reverse(c1), conn).U
        assert np.linalg.norm(back @ U1 - np.eye(g.dim)) < 1e-6
        assert both.defect < 1e-8


def test_reparametrization_invariance():
    c = _synth("p0 p1", 512)
    conn = random_connection(get_group("SU2"), 1)
    U = transport(c, conn).U
    for S in ([], [0.3], [0.1, 0.55, 0.9]):
        V = transport(compose(c, psi(S)), conn).U
        assert np.linalg.norm(U - V) < 1e-6


def test_richardson_order():
    c = _synth("p0 p1", 64)
    conn = random_connection(get_group("SU2"), 2)
    assert richardson_order(c, conn, 64) >= 3.5
    assert transport(c, conn).error_estimate < 1e-5
    with pytest.raises(ValueError):
        transport(c, conn, steps=10)


def test_batched_transport_matches_single():
    c = _synth("p2 p3'", 128)
    conns = [random_connection(get_group("SO3"), k) for k in range(4)]
    many = transport_many(c, conns)
    for conn, r in zip(conns, many):
        assert np.allclose(transport(c, conn, richardson=False).U, r.U, atol=1e-14)
    with pytest.raises(ValueError):
        transport_many(c, [conns[0], random_connection(get_group("SU2"), 0)])


def test_holonomy_verdicts():
    assert holonomy_trivial(_synth("p0 p1 p1' p0'")).trivial
    assert holonomy_trivial(_synth("s0 t0 t0' s0'"), "SL2R").worst < 1e-9
    comm = _synth("p0 p1 p0' p1'")
    su2 = holonomy_trivial(comm, "SU2")
    assert not su2.trivial and su2.worst > 1e-2
    u1 = holonomy_trivial(comm, "U1", n_conn=10)
    assert u1.trivial
    assert "evidence" in u1.note
    with pytest.raises(CurveError):
        holonomy_trivial(_synth("s0"))


def test_transport_is_invariant_along_a_thin_homotopy():
    c = _synth("p0 s1 s1' p1")
    res = remove_whiskers(c)
    conn = random_connection(get_group("SU2"), 4)
    U0 = transport(c, conn).U
    H = res.grid.H
    for j in np.linspace(0, H.shape[1] - 1, 9).round().astype(int):
        col = SampledCurve.from_points(H[:, j], res.grid.t)
        assert np.linalg.norm(transport(col, conn).U - U0) < 1e-5


def test_word_map_commutator_is_rarely_trivial():
    g = get_group("SU2")
    rng = np.random.default_rng(0)
    w = parse_word("a b a' b'")
    devs = [deviation(word_map_eval(w, {"a": g.random_element(rng), "b": g.random_element(rng)}, "SU2"))
            for _ in range(1000)]
    assert np.mean(np.array(devs) > 0.1) > 0.5
    u1 = get_group("U1")
    for _ in range(20):
        val = word_map_eval(w, {"a": u1.random_element(rng), "b": u1.random_element(rng)}, "U1")
        assert deviation(val) < 1e-12
    with pytest.raises(KeyError):
        word_map_eval(w, {"a": np.eye(2)})


def test_word_map_order_matches_transport():
    g = get_group("SU2")
    c = _synth("p0 p1")
    d = decompose(c)
    rng = np.random.default_rng(1)
    target = {a: g.random_element(rng) for a in d.arcs}
    conn = distinguishing_connection(c, d, g, target)
    U = tube_transport(c, conn).U
    letters = [iv.letter for iv in d.intervals]
    assert np.linalg.norm(U - word_map_eval(letters, target, "SU2")) < 1e-4


def test_single_arc_tube_transport():
    g = get_group("SO3")
    c = _synth("p3")
    d = decompose(c)
    (arc,) = d.arcs
    target = {arc: g.random_element(np.random.default_rng(5))}
    U = tube_transport(c, distinguishing_connection(c, d, g, target)).U
    assert np.linalg.norm(U - target[arc]) < 1e-4


# signatures -------------------------------------------------------------------------

def test_signature_level_two_matches_double_sum():
    rng = np.random.default_rng(0)
    pts = np.cumsum(rng.normal(size=(40, 3)), axis=0)
    S = signature(pts, 3)
    assert np.allclose(S.level(1), pts[-1] - pts[0])
    assert np.allclose(S.level(2), signature_level2_bruteforce(pts), atol=1e-10)
    sym = 0.5 * (S.level(2) + S.level(2).T)
    assert np.allclose(sym, 0.5 * np.outer(S.level(1), S.level(1)), atol=1e-10)


def test_signature_chen_identity():
    rng = np.random.default_rng(1)
    a = np.cumsum(rng.normal(size=(17, 2)), axis=0)
    b = a[-1] + np.cumsum(rng.normal(size=(9, 2)), axis=0)
    Sa, Sb, Sab = signature(a, 4), signature(np.vstack([a[-1:], b]), 4), signature(np.vstack([a, b]), 4)
    for k in range(1, 5):
        want = Sa.level(k) + Sb.level(k)
        for i in range(1, k):
            want = want + np.multiply.outer(Sa.level(i), Sb.level(k - i))
        assert np.allclose(Sab.level(k), want, atol=1e-9)


def test_signature_of_whisker_and_square():
    c = _synth("p0 s0 t0 t0' s0' p0'")
    assert signature(c, 4).max_abs() <= 1e-9
    sq = unit_square()
    assert signature(sq, 2).antisymmetric_area() == pytest.approx(shoelace(sq), abs=1e-12)
    assert abs(signature(sq, 2).antisymmetric_area() - 1.0) <= 1e-9
    assert signature(constant_curve([0.0, 0.0]), 3).max_abs() == 0.0
    with pytest.raises(ValueError):
        signature(sq, 6)


def test_iterated_integrals():
    c = _synth("p0 p1'", 256)
    w1, w2 = random_form(1), random_form(2)
    assert iterated_integrals_with_forms(c, [w1]) == pytest.approx(line_integral(c, w1), abs=1e-7)
    X, _ = c.evaluate(np.linspace(0, 1, 200001))
    mid, dX = 0.5 * (X[1:] + X[:-1]), np.diff(X, axis=0)
    ref = iterated_integral_2_bruteforce(mid, dX, w1.along, w2.along)
    assert iterated_integrals_with_forms(c, [w1, w2]) == pytest.approx(ref, abs=1e-6)
    whisker = _synth("p2 s2 w0 w0' s2' p2'", 256)
    forms = [random_form(k) for k in range(3)]
    assert abs(iterated_integrals_with_forms(whisker, forms)) <= 1e-6
    with pytest.raises(ValueError):
        iterated_integrals_with_forms(c, [])
