import math
import warnings

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from varbesov.exponents import (
    ExponentError,
    LogHolderWarning,
    VariableExponent,
    conjugate,
    estimate_clog,
    parse_exponent,
)
from varbesov.expression import ExpressionSyntaxError, parse, smoothstep
from varbesov.grid import Grid


def test_constant_literal():
    g = Grid(1, 0, 6)
    p = parse_exponent("2", g)
    assert p.is_constant
    assert p.lower_bound == p.upper_bound == 2.0


def test_sine_range_on_full_period():
    g = Grid(1, 4, 10)  # box of side 16 contains full periods of sin(x)
    p = parse_exponent("2 + 0.5*sin(x)", g)
    assert p.lower_bound == pytest.approx(1.5, abs=1e-4)
    assert p.upper_bound == pytest.approx(2.5, abs=1e-4)


def test_unbalanced_parenthesis_offset():
    with pytest.raises(ExpressionSyntaxError) as exc:
        parse("1/(x")
    assert exc.value.position == 3


@pytest.mark.parametrize("text", ["2 +", "sin(", "foo(x)", "2 ** 3", "max(1)"])
def test_malformed_expressions(text):
    with pytest.raises(ExpressionSyntaxError):
        parse(text)


def test_class_violations():
    g = Grid(1, 0, 4)
    with pytest.raises(ExponentError):
        parse_exponent("0.5", g, "P")
    with pytest.raises(ExponentError):
        parse_exponent("x - 0.5", g, "P0")
    # smoothness functions may be negative
    assert parse_exponent("x - 0.5", g, "real").lower_bound == -0.5


@pytest.mark.parametrize("value, expected", [(2.0, 2.0), (1.0, math.inf), (4.0, 4.0 / 3.0)])
def test_conjugate_constants(value, expected):
    g = Grid(1, 0, 4)
    pc = conjugate(VariableExponent.constant(g, value, "P"))
    if math.isinf(expected):
        assert pc.is_infinite
    else:
        assert np.allclose(pc.values, expected, rtol=0, atol=1e-15)


@settings(max_examples=40, deadline=None)
@given(st.floats(1.05, 6.0), st.floats(0.0, 0.9))
def test_conjugate_is_an_involution(base, amp):
    g = Grid(1, 0, 6)
    x = g.coordinates()[0]
    p = VariableExponent(g, base + amp * np.sin(2 * np.pi * x) ** 2, exponent_class="P")
    pp = conjugate(conjugate(p))
    assert np.allclose(pp.values, p.values, rtol=1e-12)
    assert np.allclose(1 / p.values + 1 / conjugate(p).values, 1.0, atol=1e-12)


def test_clog_of_constant_is_zero():
    g = Grid(1, 2, 8)
    assert estimate_clog(VariableExponent.constant(g, 3.0)) == 0.0


def test_clog_of_identity_matches_brute_force():
    # brute force over every pair on the coarse grid
    coarse = Grid(1, 0, 6)
    x = coarse.coordinates()[0]
    d = np.abs(x[:, None] - x[None, :])
    off = d > 0
    brute = np.max(d[off] * np.log(math.e + 1.0 / d[off]))
    est_coarse = estimate_clog(VariableExponent(coarse, x, exponent_class="real"))
    assert est_coarse == pytest.approx(brute, rel=1e-12)
    fine = Grid(1, 0, 8)
    xf = fine.coordinates()[0]
    est_fine = estimate_clog(VariableExponent(fine, xf, exponent_class="real"))
    assert est_fine > 0
    assert abs(est_fine / brute - 1) <= 0.05


def test_clog_of_jump_grows_with_resolution():
    ests = []
    for J in (6, 8, 10):
        g = Grid(1, 0, J)
        x = g.coordinates()[0]
        ests.append(estimate_clog(VariableExponent(g, np.where(x < 0.5, 1.0, 2.0))))
    # |jump| * log(e + 1/h) grows by about log(4) per two refinements
    assert ests[0] < ests[1] < ests[2]
    assert ests[2] - ests[1] == pytest.approx(math.log(4), rel=0.05)
    g = Grid(1, 0, 10)
    x = g.coordinates()[0]
    with warnings.catch_warnings(record=True) as rec:
        warnings.simplefilter("always")
        estimate_clog(VariableExponent(g, np.where(x < 0.5, 1.0, 2.0)), threshold=3.0)
    assert any(issubclass(w.category, LogHolderWarning) for w in rec)


def test_infinity_flag():
    g = Grid(1, 0, 4)
    p = parse_exponent("inf", g)
    assert p.is_infinite and p.has_infinity
    assert np.all(np.isnan(p.values))
    assert np.all(p.reciprocal() == 0.0)


def test_smoothstep_limits():
    t = np.array([-1.0, 0.0, 0.5, 1.0, 2.0])
    s = smoothstep(0.0, 1.0, t)
    assert s[0] == 0.0 and s[1] == 0.0
    assert s[3] == 1.0 and s[4] == 1.0
    assert s[2] == pytest.approx(0.5)


@settings(max_examples=30, deadline=None)
@given(st.floats(-3, 3), st.floats(-3, 3))
def test_expression_arithmetic_matches_python(a, b):
    g = Grid(1, 0, 3)
    val = parse(f"({a!r}) * x + ({b!r}) - abs({a!r})").evaluate({"x": g.coordinates()[0]})
    ref = a * g.coordinates()[0] + b - abs(a)
    assert np.allclose(val, ref, rtol=1e-12, atol=1e-12)
