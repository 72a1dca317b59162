import math

import pytest
from hypothesis import given, strategies as st

from app.errors import PotentialSyntaxError, UnknownIdentifier
from app.expression import BinOp, Call, Neg, Num, Var, parse_potential, serialize
from app.potential import eval_plain


def test_parse_respects_precedence_and_associativity():
    assert eval_plain(parse_potential("1 + 2*3"), 0.0) == 7.0
    assert eval_plain(parse_potential("(1 + 2)*3"), 0.0) == 9.0
    assert eval_plain(parse_potential("2^3^2"), 0.0) == 512.0
    assert eval_plain(parse_potential("8/4/2"), 0.0) == 1.0
    assert eval_plain(parse_potential("1 - 2 - 3"), 0.0) == -4.0


def test_unary_minus_binds_tighter_than_power():
    expr = parse_potential("-S^2")
    assert expr.root == BinOp("^", Neg(Var()), Num(2.0))
    assert eval_plain(expr, 3.0) == 9.0


def test_pow_is_a_spelling_of_caret():
    assert parse_potential("pow(S, 2)") == parse_potential("S^2")


def test_constants_and_functions():
    assert eval_plain(parse_potential("pi"), 0.0) == math.pi
    assert eval_plain(parse_potential("e"), 0.0) == math.e
    expr = parse_potential("log(1 + S) + exp(-S)")
    assert isinstance(expr.root.left, Call)
    assert eval_plain(expr, 1.0) == pytest.approx(math.log(2.0) + math.exp(-1.0))
    assert eval_plain(parse_potential("sqrt(S) + sin(S) * cos(S)"), 4.0) == pytest.approx(
        2.0 + math.sin(4.0) * math.cos(4.0)
    )


def test_scientific_literals():
    assert eval_plain(parse_potential("1.5e-3*S"), 2.0) == pytest.approx(3e-3)
    assert eval_plain(parse_potential(".5 + 2."), 0.0) == 2.5


@pytest.mark.parametrize(
    "text, position",
    [
        ("S +", 3),
        ("(S", 2),
        ("S S", 2),
        ("*S", 0),
        ("S $ 1", 2),
        ("log S", 4),
    ],
)
def test_syntax_errors_report_position(text, position):
    with pytest.raises(PotentialSyntaxError) as excinfo:
        parse_potential(text)
    assert excinfo.value.position == position
    assert excinfo.value.expected
    assert excinfo.value.code == "syntax_error"


def test_empty_and_overflowing_input():
    with pytest.raises(PotentialSyntaxError):
        parse_potential("")
    with pytest.raises(PotentialSyntaxError):
        parse_potential("   ")
    with pytest.raises(PotentialSyntaxError):
        parse_potential("1e400 * S")


def test_unknown_identifier():
    with pytest.raises(UnknownIdentifier) as excinfo:
        parse_potential("S + tanh(S)")
    assert excinfo.value.name == "tanh"
    assert excinfo.value.position == 4
    with pytest.raises(UnknownIdentifier):
        parse_potential("x")


def test_parse_is_memoised_and_keeps_source_text():
    first = parse_potential("S + 0.1*S^2")
    assert parse_potential("S + 0.1*S^2") is first
    assert first.text == "S + 0.1*S^2"
    # The source text does not take part in equality.
    assert parse_potential("S+0.1*S^2") == first


@pytest.mark.parametrize(
    "text",
    ["S", "-S^2", "log(1 + S) + S", "pow(S, 2.5) - 3/S", "exp(-(S - 1)^2) * pi", "1e-12 + sqrt(e*S)"],
)
def test_serialize_is_parseable_and_stable(text):
    expr = parse_potential(text)
    canonical = serialize(expr)
    assert parse_potential(canonical) == expr
    assert str(expr) == canonical


_leaves = st.sampled_from(["S", "pi", "e", "1", "2.5", "0.125"])


def _combine(children):
    return st.one_of(
        st.tuples(children, st.sampled_from(["+", "-", "*", "/", "^"]), children).map(
            lambda t: f"({t[0]} {t[1]} {t[2]})"
        ),
        st.tuples(st.sampled_from(["exp", "log", "sqrt", "sin", "cos"]), children).map(lambda t: f"{t[0]}({t[1]})"),
        children.map(lambda c: f"-{c}"),
    )


@given(st.recursive(_leaves, _combine, max_leaves=8))
def test_serialize_round_trips_generated_expressions(text):
    expr = parse_potential(text)
    assert parse_potential(serialize(expr)) == expr
