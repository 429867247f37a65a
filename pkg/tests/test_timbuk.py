import pytest

from simred import TimbukParseError, TreeAutomaton, parse_timbuk, serialize_timbuk
from simred.generate import random_ta


def test_parse_t1(t1):
    assert t1.state_names == ("q0", "q1")
    assert dict(zip(t1.symbol_names, t1.ranks)) == {"a": 0, "g": 1}
    assert t1.finals == {1}
    assert set(t1.rules) == {((), 0, 0), ((0,), 1, 1), ((1,), 1, 1)}


def test_parse_nullary_without_parens():
    ta = parse_timbuk(
        "Ops a:0\nAutomaton A\nStates q\nFinal States q\nTransitions\na -> q\n"
    )
    assert ta.rules == (((), 0, 0),)


def test_parse_whitespace_and_comments():
    ta = parse_timbuk(
        "Ops  f:2  a:0   # ranked alphabet\n"
        "Automaton A\n"
        "States q0 q1 q2\n"
        "Final States q2\n"
        "Transitions\n"
        "  a()->q0   # nullary\n"
        "f( q0 , q1 )  ->  q2\n"
    )
    assert (("q0", "q1"), "f", "q2") == (
        tuple(ta.state_names[q] for q in ta.rules[1][0]),
        ta.symbol_names[ta.rules[1][1]],
        ta.state_names[ta.rules[1][2]],
    )


def test_arity_mismatch_errors():
    text = (
        "Ops g:1\nAutomaton A\nStates q0 q1 q2\nFinal States q2\nTransitions\n"
        "g(q0,q1) -> q2\n"
    )
    with pytest.raises(TimbukParseError, match="arity mismatch") as err:
        parse_timbuk(text)
    assert err.value.line == 6


def test_undeclared_state_and_symbol():
    with pytest.raises(TimbukParseError, match="undeclared symbol"):
        parse_timbuk("Ops a:0\nAutomaton A\nStates q\nFinal States q\nTransitions\nb -> q\n")
    with pytest.raises(TimbukParseError, match="undeclared state"):
        parse_timbuk("Ops a:0\nAutomaton A\nStates q\nFinal States q\nTransitions\na -> zz\n")
    with pytest.raises(TimbukParseError, match="undeclared state"):
        parse_timbuk("Ops a:0\nAutomaton A\nStates q\nFinal States zz\nTransitions\na -> q\n")


def test_missing_sections():
    with pytest.raises(TimbukParseError, match="missing Automaton"):
        parse_timbuk("Ops a:0\n")
    with pytest.raises(TimbukParseError, match="missing Final States"):
        parse_timbuk("Ops a:0\nAutomaton A\nStates q\n")
    with pytest.raises(TimbukParseError, match="missing Transitions"):
        parse_timbuk("Ops a:0\nAutomaton A\nStates q\nFinal States q\n")


def test_round_trip_identity(t1, t1_text):
    assert parse_timbuk(serialize_timbuk(t1)) == t1
    assert parse_timbuk(t1_text) == t1


def test_canonicalization_idempotent(t1_text):
    texts = [t1_text]
    for seed in range(10):
        texts.append(serialize_timbuk(random_ta(5, 3, 2, 8, seed=seed)))
    for text in texts:
        once = serialize_timbuk(parse_timbuk(text))
        twice = serialize_timbuk(parse_timbuk(once))
        assert once == twice


def test_constructor_validates():
    with pytest.raises(Exception, match="rank"):
        TreeAutomaton(["q"], ["f"], [2], [((0,), 0, 0)], [])
    with pytest.raises(Exception, match="out of range"):
        TreeAutomaton(["q"], ["f"], [1], [((5,), 0, 0)], [])
