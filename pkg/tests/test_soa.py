import pytest
from hypothesis import given

from mistakebound.adversary import worst_case_stream
from mistakebound.core import make_class, powerset, singletons
from mistakebound.dims import Littlestone, ldim
from mistakebound.soa import SoaState, UnrealizableStream, soa_predict, soa_run

from conftest import class_and_realizable_stream, classes

S3 = singletons(3)


def test_predict_examples():
    assert soa_predict(make_class([[1, 0, 0]]), 0) == 1
    assert soa_predict(S3, 0) == 0
    assert soa_predict(powerset(2), 0) == 1  # tie between equal dimensions goes to 1


def test_predict_empty_class():
    with pytest.raises(ValueError):
        soa_predict(make_class([], n=2, allow_empty=True), 0)


def test_run_trace_on_singletons():
    preds, mistakes, state = soa_run(S3, [(0, 0), (1, 0), (2, 1)])
    # round 2 is a tie between {010} and {001}, broken toward 1
    assert preds == [0, 1, 1]
    assert mistakes == 1
    assert state.version_space.rows == ((0, 0, 1),)


def test_run_single_concept_never_errs():
    C = make_class([[0, 1, 1, 0]])
    _, mistakes, _ = soa_run(C, [(x, C.rows[0][x]) for x in [3, 1, 0, 2, 1]])
    assert mistakes == 0


def test_run_powerset_worst_case():
    C = powerset(2)
    wc = worst_case_stream(C, SoaState(C, C.full))
    _, mistakes, _ = soa_run(C, wc.stream)
    assert mistakes == wc.forced == 2


def test_unrealizable_stream_reports_prefix():
    with pytest.raises(UnrealizableStream) as err:
        soa_run(S3, [(0, 1), (2, 0), (1, 1)])
    assert err.value.prefix == [(0, 1), (2, 0), (1, 1)]


@given(classes(max_n=4, max_size=10))
def test_worst_case_mistakes_equal_ldim(C):
    wc = worst_case_stream(C, SoaState(C, C.full))
    assert wc.forced == max(ldim(C), 0)


@given(class_and_realizable_stream())
def test_mistakes_drop_ldim(data):
    C, stream = data
    lit = Littlestone(C)
    state = SoaState(C, C.full)
    for x, y in stream:
        before = lit(state.mask)
        if state.update(x, y):
            assert lit(state.mask) < before
    assert state.mistakes <= ldim(C)
