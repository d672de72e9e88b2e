import cmath
import math
from pathlib import Path

import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from cmc1.errors import ExprSyntaxError, PoleSignal, UnknownIdentifier
from cmc1.exprlang import (FUNCTIONS, Bin, Call, Const, Neg, Num, Var, compile_map, eval_jet,
                           evaluate, has_var, parse, to_text, tokenize)

CORPUS = [ln.strip() for ln in (Path(__file__).parent / "data" / "expressions.txt")
          .read_text().splitlines() if ln.strip()]

leaves = st.one_of(
    st.builds(Num, st.floats(0, 1e6, allow_nan=False, allow_infinity=False).map(complex)),
    st.sampled_from([Const("pi"), Const("i"), Const("e"), Var("z")]),
)
trees = st.recursive(
    leaves,
    lambda kids: st.one_of(
        st.builds(Neg, kids),
        st.builds(Bin, st.sampled_from("+-*/^"), kids, kids),
        st.builds(Call, st.sampled_from(sorted(FUNCTIONS)), kids),
    ),
    max_leaves=12,
)


@pytest.mark.parametrize("text", CORPUS)
def test_corpus_roundtrip(text):
    tree = parse(text)
    assert parse(to_text(tree)) == tree
    assert to_text(parse(to_text(tree))) == to_text(tree)


@given(trees)
@settings(max_examples=300)
def test_printed_trees_parse_back_identically(tree):
    assert parse(to_text(tree)) == tree


@pytest.mark.parametrize("text, z, expected", [
    ("1+2*z^2", 2, 9),
    ("2^3^2", 0, 512),
    ("-z^2", 3, -9),
    ("(-z)^2", 3, 9),
    ("8/4/2", 0, 1),
    ("1-2-3", 0, -4),
    ("2*-z", 5, -10),
    ("1.5e2 + .5", 0, 150.5),
])
def test_precedence_and_associativity(text, z, expected):
    assert evaluate(parse(text), z) == expected


def test_euler_identity():
    assert evaluate(parse("exp(i*pi) + 1"), 0) == complex(0, math.sin(math.pi))
    assert abs(evaluate(parse("exp(i*z)"), math.pi) + 1) < 1e-15


@pytest.mark.parametrize("text", CORPUS[::5])
def test_jets_match_finite_differences(text):
    tree = parse(text)
    z0, h = 0.35 + 0.15j, 1e-5
    jet = eval_jet(tree, z0, 2)
    fd1 = (evaluate(tree, z0 + h) - evaluate(tree, z0 - h)) / (2 * h)
    assert abs(jet.deriv(1) - fd1) <= 1e-7 * max(1.0, abs(fd1))
    assert abs(jet.value - evaluate(tree, z0)) <= 1e-14 * max(1.0, abs(jet.value))


def test_constant_expressions_give_constant_jets():
    jet = eval_jet(parse("2*pi"), 0.5, 3)
    assert jet.c.tolist() == [2 * math.pi, 0, 0, 0]
    assert not has_var(parse("sin(pi)")) and has_var(parse("sin(pi*z)"))


@pytest.mark.parametrize("text, offset", [
    ("exp(", 4),
    ("1 +", 3),
    ("2z", 1),
    ("z(1)", 1),
    ("sin z", 4),
    ("(1", 2),
    ("1 $ 2", 2),
    ("1e999", 0),
    ("é+", 0),
    ("\u00a01 $", 4),          # no-break space is two bytes
])
def test_syntax_errors_report_byte_offsets(text, offset):
    with pytest.raises(ExprSyntaxError) as err:
        parse(text)
    assert err.value.offset == offset


def test_expected_token_sets():
    with pytest.raises(ExprSyntaxError) as err:
        parse("exp(")
    assert {"(", "-", "identifier", "number"} <= set(err.value.expected)


def test_unknown_identifiers():
    with pytest.raises(UnknownIdentifier) as err:
        parse("1 + foo")
    assert err.value.offset == 4
    with pytest.raises(UnknownIdentifier):
        parse("z", var="s")
    assert evaluate(parse("s^2", var="s"), 3) == 9


def test_poles_name_the_subexpression():
    with pytest.raises(PoleSignal) as err:
        evaluate(parse("1 + 1/(z-1)"), 1)
    assert err.value.expr == "1/(z-1)"
    with pytest.raises(PoleSignal):
        eval_jet(parse("log(z)"), 0, 2)


def test_compiled_maps_are_analytic_maps():
    f = compile_map("cosh(s)^2 - sinh(s)^2", "s", real=True)
    assert abs(f(0.7 + 0.2j) - 1) < 1e-14 and f.real
    assert abs(f.derivative()(0.4)) < 1e-14
    g = compile_map("exp(-i*z)")
    assert abs(g(1.0) - cmath.exp(-1j)) < 1e-16


def test_tokens_carry_offsets():
    toks = tokenize("sin( z )")
    assert [(t.kind, t.offset) for t in toks] == [
        ("name", 0), ("op", 3), ("name", 5), ("op", 7), ("end", 8)]
