from fractions import Fraction

import numpy as np
import pytest
from hypothesis import given, strategies as st

from mistakebound.core import make_class, powerset, singletons, thresholds
from mistakebound.dims import dual_vcdim, threshold_dim, vcdim
from mistakebound.games import (
    GameMatrix, MixedStrategy, approx_ok, class_matrix, dual_eps_approx, eps_net, error_matrix,
    game_value, net_ok, triangular_dim,
)

from conftest import classes

S3 = singletons(3)


def tri(k):
    return GameMatrix.from_rows([[int(i <= j) for j in range(k)] for i in range(k)])


def guaranteed(G, sol):
    """(best column against the row mix, best row against the column mix)."""
    M = np.array(G.entries, dtype=object)
    p = sol.row_strategy.dense(G.shape[0])
    q = sol.col_strategy.dense(G.shape[1])
    upper = max(sum(p[i] * M[i][j] for i in range(len(p))) for j in range(len(q)))
    lower = min(sum(q[j] * M[i][j] for j in range(len(q))) for i in range(len(p)))
    return upper, lower


def test_exact_examples():
    for G, v in [(tri(3), 1), (GameMatrix.from_rows([[1, 0], [0, 1]]), Fraction(1, 2)),
                 (GameMatrix.from_rows([[0]]), 0)]:
        sol = game_value(G)
        assert sol.value == v and sol.duality_gap == 0
        assert guaranteed(G, sol) == (v, v)
        assert sum(sol.row_strategy.weights) == 1 == sum(sol.col_strategy.weights)


def test_iterative_examples():
    sol = game_value(GameMatrix.from_rows([[1, 0], [0, 1]]), mode="iter", tol=1e-4)
    assert abs(sol.value - 0.5) <= 1e-4 and sol.duality_gap <= 1e-4


def test_exact_size_limit():
    with pytest.raises(ValueError):
        game_value(GameMatrix.from_rows([[1] * 13] * 13))


def test_bad_matrix():
    with pytest.raises(ValueError):
        GameMatrix.from_rows([[0, 2]])
    with pytest.raises(ValueError):
        MixedStrategy((0, 0), (Fraction(1, 2), Fraction(1, 2)))


@pytest.mark.parametrize("k", range(1, 9))
def test_triangular_value_and_dim(k):
    assert game_value(tri(k)).value == 1
    assert triangular_dim(tri(k)) == k


def test_triangular_dim_examples():
    assert triangular_dim(GameMatrix.from_rows([[1] * 4] * 3)) == 1
    assert triangular_dim(GameMatrix.from_rows([[0] * 4] * 3)) == 0


matrices = st.integers(1, 7).flatmap(
    lambda r: st.integers(1, 7).flatmap(
        lambda c: st.lists(st.lists(st.integers(0, 1), min_size=c, max_size=c), min_size=r, max_size=r)))


@given(matrices)
def test_exact_gap_zero_and_iterative_agrees(rows):
    G = GameMatrix.from_rows(rows)
    sol = game_value(G)
    upper, lower = guaranteed(G, sol)
    assert upper == lower == sol.value
    it = game_value(G, mode="iterative", tol=1e-4)
    assert abs(float(it.value) - float(sol.value)) <= 1e-4
    assert it.duality_gap <= 1e-4


@given(classes(max_n=5, max_size=10))
def test_triangular_dim_of_class_matrix_matches_threshold_dim(C):
    assert triangular_dim(class_matrix(C)) == threshold_dim(C)


def test_eps_net_on_singletons():
    S = [(0, 0), (1, 0), (2, 0)]
    net = eps_net(S3, S, 0.3, seed=1)
    assert net.game_value == Fraction(1, 3)
    assert set(net.sequence) == set(S)
    for h in S3.rows:
        errs = sum(h[x] != y for x, y in net.sequence)
        assert errs / net.size > 0.15
    assert net.doublings <= 10
    assert net.constant(vcdim(S3), Fraction(3, 10)) > 0


def test_eps_net_absent_for_realizable_set():
    assert eps_net(S3, [(0, 0)], 0.3) is None


def test_dual_approx_examples():
    pi = MixedStrategy((2,), (Fraction(1),))
    ms = dual_eps_approx(S3, pi, Fraction(1, 4), [(2, 1)])
    assert ms.counts == ((2, 1),) and ms.size == 1
    C = make_class([[0, 1, 0], [0, 0, 1]])
    pi = MixedStrategy((0, 1), (Fraction(1, 2), Fraction(1, 2)))
    ms = dual_eps_approx(C, pi, Fraction(1, 4), [(0, 0)])
    assert approx_ok(C, dict(ms.counts), Fraction(1, 4), [(0, 0)])
    assert ms.constant(dual_vcdim(C), Fraction(1, 4)) > 0


def test_dual_approx_precondition():
    pi = MixedStrategy((0, 1), (Fraction(1, 2), Fraction(1, 2)))
    with pytest.raises(ValueError):
        dual_eps_approx(S3, pi, Fraction(1, 4), [(0, 1)])


@given(classes(max_n=4, max_size=8), st.sampled_from([Fraction(1, 10), Fraction(1, 4), Fraction(2, 5)]),
       st.integers(0, 2**16))
def test_sparsifiers_meet_their_postconditions(C, eps, seed):
    S = [(x, y) for x in range(C.n) for y in (0, 1) if (x * 7 + y + seed) % 3]
    if not S:
        return
    sol = game_value(error_matrix(C, S))
    net = eps_net(C, S, eps, seed=seed)
    if sol.value <= eps:
        assert net is None
        ms = dual_eps_approx(C, sol.row_strategy, eps, S, seed=seed)
        assert approx_ok(C, dict(ms.counts), eps, S) and ms.doublings <= 10
    else:
        assert net_ok(C, net.sequence, eps) and net.doublings <= 10


def test_eps_net_deterministic_under_seed():
    C = thresholds(3)
    S = [(0, 1), (2, 0), (1, 1), (1, 0)]
    assert eps_net(C, S, 0.25, seed=5) == eps_net(C, S, 0.25, seed=5)
    assert eps_net(powerset(2), [(0, 0), (0, 1)], 0.25, seed=5) is not None
