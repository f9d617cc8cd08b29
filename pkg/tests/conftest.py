import hypothesis.strategies as st
from hypothesis import settings

from mistakebound.core import make_class

settings.register_profile("default", max_examples=60, deadline=None)
settings.load_profile("default")


@st.composite
def classes(draw, max_n=4, max_size=8, min_size=1):
    n = draw(st.integers(1, max_n))
    codes = draw(st.sets(st.integers(0, 2**n - 1), min_size=min_size, max_size=min(max_size, 2**n)))
    rows = [[(v >> (n - 1 - j)) & 1 for j in range(n)] for v in sorted(codes)]
    return make_class(rows)


@st.composite
def class_and_examples(draw, max_n=4, max_len=6):
    C = draw(classes(max_n=max_n))
    S = draw(st.lists(st.tuples(st.integers(0, C.n - 1), st.integers(0, 1)), max_size=max_len))
    return C, S


@st.composite
def class_and_realizable_stream(draw, max_n=4, max_len=8):
    C = draw(classes(max_n=max_n))
    h = draw(st.sampled_from(C.rows))
    xs = draw(st.lists(st.integers(0, C.n - 1), max_size=max_len))
    return C, [(x, h[x]) for x in xs]


ACCEPTANCE_LINES: list[str] = []


def pytest_terminal_summary(terminalreporter):
    if ACCEPTANCE_LINES:
        terminalreporter.section("acceptance criteria")
        for line in ACCEPTANCE_LINES:
            terminalreporter.write_line(line)
