"""Symbolic expression layer: parsing, canonical forms, derivatives.

Derivatives are checked against a central finite-difference oracle;
canonicalization against independently constructed equal expressions.
"""

import math

import numpy as np
import pytest
import sympy as sp
from hypothesis import given, settings
from hypothesis import strategies as st

from algebroids import symexpr
from algebroids.symexpr import (EvalError, ParseError, UnknownVariableError,
                                VarEnv, ZeroTestConfig, canonicalize, diff,
                                evaluate, is_zero, parse, to_str)

ENV = VarEnv.make(base=("x1", "x2"), fiber=("y1", "y2"))

SAMPLES = [
    "x1 + 2*x2",
    "x1^2 - 3*x1*x2 + 1/2",
    "(x1 + x2)^3 / (1 + x1^2)",
    "sin(x1)*cos(x2) + exp(x1/3)",
    "-x1 + (-x2)",
    "2/3 * x1 - 0.25",
    "y1*y2 - x1/(x2^2 + 1)",
]


# -- parsing ----------------------------------------------------------------

@pytest.mark.parametrize("text", SAMPLES)
def test_roundtrip_through_printer(text):
    e = parse(text, ENV)
    again = parse(to_str(e), ENV)
    assert canonicalize(e - again) == 0


@pytest.mark.parametrize("bad", ["x1 +", "(x1", "x1^x2", "sin x1", "x1**2",
                                 "1..2", ")", ""])
def test_parse_errors(bad):
    with pytest.raises(ParseError):
        parse(bad, ENV)


def test_unknown_variable():
    with pytest.raises(UnknownVariableError):
        parse("x1 + z9", ENV)


def test_rational_literals_are_exact():
    e = parse("1/3 + 1/6", ENV)
    assert e == sp.Rational(1, 2)
    assert parse("0.1", ENV) == sp.Rational(1, 10)


def test_unary_signs_and_precedence():
    assert canonicalize(parse("--x1", ENV) - parse("x1", ENV)) == 0
    assert canonicalize(parse("2*x1^2", ENV) - parse("2*(x1^2)", ENV)) == 0
    assert canonicalize(parse("x1 - x2 - x2", ENV)
                        - parse("x1 - 2*x2", ENV)) == 0


# -- canonicalization -------------------------------------------------------

@pytest.mark.parametrize("a,b", [
    ("x1*(x1 + 1)", "x1^2 + x1"),
    ("(x1^2 - x2^2)/(x1 - x2)", "x1 + x2"),
    ("1/x1 + 1/x2", "(x1 + x2)/(x1*x2)"),
    ("(x1 + 1)^2", "x1^2 + 2*x1 + 1"),
])
def test_canonical_form_unique_on_rationals(a, b):
    assert to_str(parse(a, ENV)) == to_str(parse(b, ENV))


def test_canonicalize_idempotent():
    for text in SAMPLES:
        e = parse(text, ENV)
        assert canonicalize(e) == e


# -- derivatives vs finite differences --------------------------------------

@pytest.mark.parametrize("text", SAMPLES)
def test_diff_matches_finite_difference(text, rng):
    e = parse(text, ENV)
    h = 1e-5
    for v in ("x1", "x2"):
        de = diff(e, v)
        for _ in range(5):
            pt = {n: rng.uniform(-1.5, 1.5) for n in ENV.names}
            up = dict(pt, **{v: pt[v] + h})
            dn = dict(pt, **{v: pt[v] - h})
            fd = (evaluate(e, up) - evaluate(e, dn)) / (2 * h)
            exact = evaluate(de, pt)
            assert math.isclose(fd, exact, rel_tol=1e-6, abs_tol=1e-6)


def test_diff_accepts_symbols():
    e = parse("x1^3", ENV)
    assert diff(e, sp.Symbol("x1")) == 3 * sp.Symbol("x1") ** 2


# -- evaluation -------------------------------------------------------------

def test_evaluate_basic():
    e = parse("x1^2 + sin(x2)", ENV)
    val = evaluate(e, {"x1": 2.0, "x2": 0.5})
    assert math.isclose(val, 4.0 + math.sin(0.5), rel_tol=1e-12)


def test_evaluate_division_by_zero():
    e = parse("1/x1", ENV)
    with pytest.raises(EvalError):
        evaluate(e, {"x1": 0.0})


# -- zero testing -----------------------------------------------------------

def test_is_zero_exact_on_rational_fragment():
    assert is_zero(parse("(x1 + 1)^2 - x1^2 - 2*x1 - 1", ENV))
    assert not is_zero(parse("(x1 + 1)^2 - x1^2 - 2*x1", ENV))
    # exactness: a rational function smaller than any sampling tolerance
    assert not is_zero(parse("x1/1000000000000000", ENV))


def test_is_zero_sampled_on_transcendentals():
    assert is_zero(parse("sin(x1)^2 + cos(x1)^2 - 1", ENV))
    assert not is_zero(parse("sin(x1) - x1", ENV))


def test_is_zero_deterministic_given_seed():
    e = parse("sin(x1)^2 + cos(x1)^2 - 1", ENV)
    cfg = ZeroTestConfig(seed=123)
    assert is_zero(e, cfg) == is_zero(e, cfg)


# -- property tests ---------------------------------------------------------

coeffs = st.integers(min_value=-5, max_value=5)


@st.composite
def rational_exprs(draw, depth=0):
    """Random expressions in the rational fragment over (x1, x2)."""
    if depth >= 3 or draw(st.booleans()):
        leaf = draw(st.sampled_from(["x1", "x2", "const"]))
        if leaf == "const":
            return sp.Integer(draw(coeffs))
        return sp.Symbol(leaf)
    op = draw(st.sampled_from(["+", "*", "-"]))
    a = draw(rational_exprs(depth=depth + 1))
    b = draw(rational_exprs(depth=depth + 1))
    return {"+": a + b, "*": a * b, "-": a - b}[op]


@settings(max_examples=60, deadline=None)
@given(rational_exprs())
def test_property_canonicalize_idempotent(e):
    c = canonicalize(e)
    assert canonicalize(c) == c


@settings(max_examples=60, deadline=None)
@given(rational_exprs(), rational_exprs())
def test_property_diff_is_linear(a, b):
    x = "x1"
    lhs = canonicalize(diff(a + b, x))
    rhs = canonicalize(diff(a, x) + diff(b, x))
    assert canonicalize(lhs - rhs) == 0


@settings(max_examples=60, deadline=None)
@given(rational_exprs(), rational_exprs())
def test_property_leibniz_rule(a, b):
    x = "x1"
    lhs = diff(a * b, x)
    rhs = diff(a, x) * b + a * diff(b, x)
    assert canonicalize(lhs - rhs) == 0


@settings(max_examples=60, deadline=None)
@given(rational_exprs())
def test_property_printer_roundtrip(e):
    c = canonicalize(e)
    assert canonicalize(parse(to_str(c), ENV) - c) == 0
