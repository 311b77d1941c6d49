import numpy as np
import pytest
from hypothesis import given
from hypothesis import strategies as st

from oracles import central_difference, cluster, grid_critical_values
from thinloop.reparam import (PSI_DERIVATIVE_BOUND, MonotoneC1Map, bump, bump_inverse, bump_prime, identity_map,
                              padded_lengths, phi, psi, psi_scaled)

finite_sets = st.lists(st.floats(0.0, 1.0, allow_nan=False), max_size=8)
lengths = st.lists(st.floats(0.0, 10.0, allow_nan=False), min_size=1, max_size=12)


def test_bump_profile():
    x = np.linspace(0, 1, 1001)
    assert bump(0.0) == 0.0 and bump(1.0) == pytest.approx(1.0)
    assert np.all(np.diff(bump(x)) > 0)
    assert np.allclose(bump_prime(x), central_difference(bump, x), atol=1e-4)
    assert np.allclose(bump_inverse(bump(x)), x, atol=1e-5)
    assert np.max(bump_prime(x)) == pytest.approx(2.0)
    with pytest.raises(ValueError):
        bump(1.5)


@given(lengths)
def test_padded_lengths(ls):
    ls = sorted(ls, reverse=True)
    out = padded_lengths(ls)
    assert out.sum() == pytest.approx(2 * sum(ls), abs=1e-12)
    assert np.all(out >= np.asarray(ls) - 1e-12)
    assert np.all(np.diff(out) <= 1e-12)


def test_padded_lengths_rejects_bad_input():
    with pytest.raises(ValueError):
        padded_lengths([])
    with pytest.raises(ValueError):
        padded_lengths([1.0, 2.0], target=1.0)


@given(finite_sets)
def test_psi_properties(S):
    p = psi(S)
    x = np.linspace(0, 1, 20001)
    y = p(x)
    assert y[0] == 0.0 and y[-1] == 1.0
    assert np.all(np.diff(y) >= 0)
    assert np.max(p.derivative(x)) <= PSI_DERIVATIVE_BOUND + 1e-12
    assert p.derivative_bound() <= PSI_DERIVATIVE_BOUND + 1e-12
    assert np.all(p.derivative(p.x_knots) == 0)
    want = np.unique(np.concatenate([[0.0, 1.0], S]))
    assert np.array_equal(p.critical_values(), want)


@given(finite_sets)
def test_psi_derivative_matches_differences(S):
    p = psi(S)
    x = np.linspace(0, 1, 40001)
    assert np.max(np.abs(central_difference(p, x) - p.derivative(x))) < 1e-3 * (1 + p.derivative_bound())


def test_psi_grid_critical_values():
    rng = np.random.default_rng(3)
    for _ in range(10):
        S = rng.random(rng.integers(0, 9))
        got = grid_critical_values(psi(S))
        want = cluster(np.concatenate([[0.0, 1.0], S]), 1e-4)
        assert got.shape == want.shape
        assert np.max(np.abs(got - want)) <= 1e-4


def test_psi_derivative_is_continuous_across_resolutions():
    p = psi([0.1, 0.15, 0.6])
    jumps = []
    for n in (4000, 8000, 16000):
        x = np.linspace(0, 1, n + 1)
        jumps.append(np.max(np.abs(np.diff(central_difference(p, x)))))
    # a jump discontinuity would keep the largest step constant
    assert jumps[1] / jumps[0] < 0.6 and jumps[2] / jumps[1] < 0.6


def test_psi_empty_set_is_bump():
    x = np.linspace(0, 1, 101)
    assert np.allclose(psi([])(x), bump(x))


def test_psi_scaled_and_conjugate():
    p = psi_scaled((2.0, 5.0), [3.0, 4.5])
    assert p.domain == (2.0, 5.0)
    assert p(2.0) == 2.0 and p(5.0) == 5.0
    assert set(p.critical_values()) == {2.0, 3.0, 4.5, 5.0}
    with pytest.raises(ValueError):
        psi_scaled((0.0, 1.0), [2.0])
    with pytest.raises(ValueError):
        p(6.0)


def test_phi_fixes_the_fixed_set():
    L = 3.0
    m = phi([(0.0, 0.5), (1.0, 1.2), (2.9, 3.0)], [0.7, 2.0, 2.5], L)
    x = np.linspace(0, L, 30001)
    y = m(x)
    assert np.all(np.diff(y) >= 0)
    fixed = (x <= 0.5) | ((x >= 1.0) & (x <= 1.2)) | (x >= 2.9)
    assert np.allclose(y[fixed], x[fixed], atol=1e-12)
    crit = m.critical_values()
    for b in (0.7, 2.0, 2.5):
        assert np.min(np.abs(crit - b)) < 1e-12
        (k,) = np.flatnonzero(m.y_knots == b)
        assert m.derivative(m.x_knots[k]) == 0.0
    assert m.derivative_bound() <= PSI_DERIVATIVE_BOUND + 1e-12


def test_phi_identity_without_branch_values():
    m = phi([(0.0, 1.0)], [], 2.0)
    x = np.linspace(0, 2, 11)
    assert np.allclose(m(x), x)
    assert np.allclose(identity_map(0, 2)(x), x)


def test_map_validation():
    with pytest.raises(ValueError):
        MonotoneC1Map(np.array([0.0, 0.0]), np.array([0.0, 1.0]), ("bump",))
    with pytest.raises(ValueError):
        MonotoneC1Map(np.array([0.0, 1.0]), np.array([1.0, 0.0]), ("bump",))
    with pytest.raises(ValueError):
        psi([1.5])
