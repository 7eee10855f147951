import numpy as np
import pytest
from hypothesis import given, settings, strategies as st

from markovmix.errors import InvalidInputError, MultiplicityError
from markovmix.stationary import (
    chain_structure,
    check_stochastic,
    is_regular,
    power_iteration,
    stationary,
)

from oracles import eig_stationary, exact_stationary_2x2, random_stochastic


def test_uniform():
    x = stationary(np.full((4, 4), 0.25)).x
    np.testing.assert_allclose(x, 0.25, atol=1e-15)


def test_two_state_hand_case():
    x = stationary(np.array([[0.9, 0.1], [0.5, 0.5]])).x
    ex = exact_stationary_2x2("0.1", "0.5")
    assert tuple(map(float, ex)) == pytest.approx((5 / 6, 1 / 6), abs=1e-15)
    np.testing.assert_allclose(x, [5 / 6, 1 / 6], atol=1e-12)


def test_identity_and_cycle_not_regular():
    assert not is_regular(np.eye(3))
    assert not is_regular(np.array([[0.0, 1.0], [1.0, 0.0]]))
    assert is_regular(np.full((3, 3), 1 / 3))
    # needs a power above one to turn positive
    assert is_regular(np.array([[0.0, 1.0], [0.5, 0.5]]))


def test_block_diagonal_raises_with_structure():
    M = np.zeros((4, 4))
    M[:2, :2] = 0.5
    M[2:, 2:] = 0.5
    with pytest.raises(MultiplicityError) as err:
        stationary(M)
    assert len(err.value.structure["closed_classes"]) == 2
    assert "closed" in str(err.value)


def test_periodic_structure_reported():
    s = chain_structure(np.array([[0.0, 1.0], [1.0, 0.0]]))
    assert s["periods"] == [2]
    assert chain_structure(np.eye(2))["periods"] == [1, 1]


def test_not_stochastic():
    with pytest.raises(InvalidInputError):
        stationary(np.array([[0.5, 0.4], [0.5, 0.5]]))
    with pytest.raises(InvalidInputError):
        check_stochastic(np.array([[1.5, -0.5], [0.5, 0.5]]))


@settings(max_examples=50, deadline=None)
@given(st.integers(2, 7), st.integers(0, 2**32 - 1))
def test_random_regular_matrices(n, seed):
    rng = np.random.default_rng(seed)
    M = random_stochastic(rng, n)
    d = stationary(M)
    assert np.all(d.x >= 0) and abs(d.x.sum() - 1) < 1e-9
    assert np.max(np.abs(d.x @ M - d.x)) < 1e-8
    np.testing.assert_allclose(d.x, eig_stationary(M), atol=1e-9)
    np.testing.assert_allclose(d.x, power_iteration(M), atol=1e-9)


@settings(max_examples=30, deadline=None)
@given(st.integers(0, 2**32 - 1), st.permutations(range(5)))
def test_relabeling_permutes_solution(seed, perm):
    M = random_stochastic(np.random.default_rng(seed), 5)
    p = np.array(perm)
    np.testing.assert_allclose(stationary(M[np.ix_(p, p)]).x, stationary(M).x[p], atol=1e-12)
