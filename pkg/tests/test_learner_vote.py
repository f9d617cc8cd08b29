import math
from fractions import Fraction

import pytest
from hypothesis import given, settings, strategies as st

from mistakebound.adversary import random_stream, worst_case_stream
from mistakebound.core import make_class, powerset, singletons, thresholds
from mistakebound.dims import ldim
from mistakebound.games import net_ok
from mistakebound.learner_vote import (
    Branch, MajHypothesis, MajLearner, VoteHypothesis, VoteLearner, halving_mistake_bound,
    lv_as_mistake_learner, lv_propose, lv_run, maj_eval, margin_bound, vote_eval,
)
from mistakebound.learner_helly import InvariantViolation

from conftest import classes

S3 = singletons(3)


def test_vote_eval_examples():
    v = VoteHypothesis.of(S3.rows)
    assert all(vote_eval(v, x) == Fraction(1, 3) for x in range(3))
    h, g = (1, 0, 1), (0, 1, 1)
    assert [vote_eval(VoteHypothesis.of([h]), x) for x in range(3)] == list(h)
    hhg = VoteHypothesis.of([h, h, g])
    assert [vote_eval(hhg, x) for x in range(3)] == [Fraction(2 * a + b, 3) for a, b in zip(h, g)]
    with pytest.raises(ValueError):
        VoteHypothesis.of([])


def test_maj_eval_examples():
    assert maj_eval(MajHypothesis(VoteHypothesis.of(S3.rows)), 0) == 0
    assert maj_eval(VoteHypothesis.of([(1, 0), (0, 1)]), 0) == 1
    assert [maj_eval(VoteHypothesis.of([(0, 1, 1)]), x) for x in range(3)] == [0, 1, 1]


def test_propose_branches_on_singletons():
    lrn = VoteLearner(S3, Fraction(2, 5))
    b = lv_propose(lrn)
    assert isinstance(b, Branch)
    assert b.game_value == Fraction(1, 3)
    assert set(b.sequence) == {(0, 0), (1, 0), (2, 0)}
    assert net_ok(S3, b.sequence, Fraction(1, 5))
    for h in S3.rows:
        assert sum(h[x] != y for x, y in b.sequence) / len(b.sequence) > Fraction(1, 10)


@pytest.mark.parametrize("eps", [Fraction(1, 10), Fraction(1, 3), Fraction(2, 5)])
def test_single_concept_zero_deviation(eps):
    C = make_class([[0, 1, 1, 0]])
    lrn = VoteLearner(C, eps)
    v = lv_propose(lrn)
    assert isinstance(v, VoteHypothesis)
    assert [v(x) for x in range(4)] == [0, 1, 1, 0]


def test_eps_range():
    for bad in (0, Fraction(1, 2), 1):
        with pytest.raises(ValueError):
            VoteLearner(S3, bad)


def test_bound_arithmetic():
    assert math.ceil(margin_bound(1, 0.4)) == 64
    assert margin_bound(2, 0.25) == pytest.approx(8 * 2 / (0.25 * 0.96875) * math.log(32))


@pytest.mark.parametrize("C,eps", [(S3, Fraction(2, 5)), (powerset(2), Fraction(1, 4))])
def test_worst_case_margin_errors(C, eps):
    cache = {}
    wc = worst_case_stream(C, VoteLearner(C, eps, cache=cache), T=20)
    trace = lv_run(C, eps, wc.stream, learner=VoteLearner(C, eps, cache=cache))
    assert trace.margin_error_count == wc.forced
    assert trace.margin_error_count <= math.ceil(margin_bound(ldim(C), eps))


@pytest.mark.parametrize("C,bound", [(S3, 80), (powerset(2), 160)])
def test_majority_wrapper_mistakes(C, bound):
    cache = {}
    wc = worst_case_stream(C, MajLearner(C, cache=cache), T=20)
    trace = lv_as_mistake_learner(C, wc.stream, learner=MajLearner(C, cache=cache))
    assert trace.mistake_count == wc.forced <= bound == 80 * ldim(C)


def test_single_concept_no_mistakes():
    C = make_class([[1, 0, 1]])
    trace = lv_as_mistake_learner(C, random_stream(C, 12, 0))
    assert trace.mistake_count == 0 and trace.margin_error_count == 0


def test_halving_base_scaled_bound():
    C = thresholds(5)
    mb = halving_mistake_bound(C)
    assert mb >= ldim(C)
    eps = Fraction(1, 4)
    for seed in range(5):
        lrn = VoteLearner(C, eps, base="halving")
        trace = lv_run(C, eps, random_stream(C, 15, seed), learner=lrn, L=mb)
        assert trace.margin_error_count <= margin_bound(mb, eps)


def test_halving_mistake_bound_examples():
    assert halving_mistake_bound(S3) == 1
    assert halving_mistake_bound(powerset(2)) == 2


def test_deterministic_under_seed():
    stream = random_stream(thresholds(4), 12, 3)
    a = lv_run(thresholds(4), Fraction(1, 4), stream, learner=VoteLearner(thresholds(4), Fraction(1, 4), seed=7))
    b = lv_run(thresholds(4), Fraction(1, 4), stream, learner=VoteLearner(thresholds(4), Fraction(1, 4), seed=7))
    assert [r.value for r in a.rounds] == [r.value for r in b.rounds]


def test_unrealizable_stream_rejected():
    with pytest.raises(InvariantViolation):
        lv_run(S3, Fraction(1, 3), [(0, 1), (1, 1)])


@settings(max_examples=25)
@given(classes(max_n=4, max_size=8), st.sampled_from([Fraction(1, 5), Fraction(1, 3), Fraction(2, 5)]),
       st.integers(0, 1000))
def test_invariants_on_random_streams(C, eps, seed):
    lrn = VoteLearner(C, eps, seed=seed)
    trace = lv_run(C, eps, random_stream(C, 10, seed), learner=lrn)  # decay, multiplicity, final inequality
    assert trace.margin_error_count <= trace.bound or trace.margin_error_count == 0
    for r in trace.rounds:
        assert 0 <= r.value <= 1
