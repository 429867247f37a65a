import pytest

from simred import build_lts, parse_timbuk

T1_TEXT = """\
Ops a:0 g:1
Automaton T1
States q0 q1
Final States q1
Transitions
a() -> q0
g(q0) -> q1
g(q1) -> q1
"""


@pytest.fixture
def l1():
    # p -a-> q, q -b-> q, r -a-> q
    return build_lts([("p", "a", "q"), ("q", "b", "q"), ("r", "a", "q")])


@pytest.fixture
def l3():
    # p -a-> p, r -a-> s
    return build_lts([("p", "a", "p"), ("r", "a", "s")])


@pytest.fixture
def t1():
    return parse_timbuk(T1_TEXT)


@pytest.fixture
def t1_text():
    return T1_TEXT
