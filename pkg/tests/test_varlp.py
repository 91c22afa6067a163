import math

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from varbesov.exponents import VariableExponent, parse_exponent
from varbesov.grid import DyadicCube, Grid
from varbesov.varlp import (
    chi_norm,
    chi_norms_at_level,
    lp_tau_norm,
    lp_tilde_norm,
    luxemburg_norm,
    luxemburg_reference,
    mixed_norm,
    mixed_norm_reference,
    modular,
    morrey_norm,
)


def bisect_root(fn, lo, hi, tol=1e-13):
    """Decreasing fn: return t with fn(t) = 1 by plain bisection."""
    for _ in range(200):
        mid = 0.5 * (lo + hi)
        if fn(mid) > 1:
            lo = mid
        else:
            hi = mid
        if hi - lo < tol * hi:
            break
    return hi


def gauss_legendre(fn, n=200):
    nodes, weights = np.polynomial.legendre.leggauss(n)
    x = 0.5 * (nodes + 1.0)
    return 0.5 * float(np.sum(weights * fn(x)))


def test_modular_constant_cases(unit_grid):
    g = unit_grid
    assert modular(parse_exponent("2", g), g.field(np.ones(g.shape))).value == 1.0
    rep = modular(parse_exponent("inf", g), g.field(0.9 * np.cos(2 * np.pi * g.coordinates()[0])))
    assert rep.finite and rep.value == 0.0
    over = modular(parse_exponent("inf", g), g.field(np.full(g.shape, 1.5)))
    assert not over.finite


def test_modular_variable_against_quadrature():
    g = Grid(1, 0, 16)
    x = g.coordinates()[0]
    p = VariableExponent(g, 2 + x)
    val = modular(p, g.field(1 + x)).value
    oracle = gauss_legendre(lambda t: (1 + t) ** (2 + t))
    assert 1 < oracle < 8
    # left rectangle rule bias is h (F(1) - F(0)) / 2 to first order
    assert val == pytest.approx(oracle - g.spacing * (8 - 1) / 2, rel=1e-8)


def test_luxemburg_closed_forms(unit_grid):
    g = unit_grid
    x = g.coordinates()[0]
    assert luxemburg_norm(parse_exponent("2", g), g.field(np.ones(g.shape))) == pytest.approx(1.0, abs=1e-10)
    p = VariableExponent(g, np.where(x < 0.5, 2.0, 3.0))
    # t^2/2 + t^3/2 = 1 at t = 2/lambda = 1
    assert luxemburg_norm(p, g.field(np.full(g.shape, 2.0))) == pytest.approx(2.0, rel=1e-10)


def test_luxemburg_variable_against_bisection():
    g = Grid(1, 0, 12)
    x = g.coordinates()[0]
    p = VariableExponent(g, 2 + x)
    f = 1 + x
    w = g.cell_volume

    def rho(lam):
        return float(np.sum((f / lam) ** (2 + x)) * w)

    assert rho(1.0) > 1 and rho(2.0) < 1
    oracle = bisect_root(rho, 1.0, 2.0)
    val = luxemburg_norm(p, g.field(f), tol=1e-12)
    assert 1 < val < 2
    assert val == pytest.approx(oracle, rel=1e-10)
    # the continuum value from quadrature agrees to discretization accuracy
    cont = bisect_root(lambda lam: gauss_legendre(lambda t: ((1 + t) / lam) ** (2 + t)), 1.0, 2.0)
    assert val == pytest.approx(cont, rel=1e-3)


def test_luxemburg_infinite_part(unit_grid):
    g = unit_grid
    x = g.coordinates()[0]
    p = VariableExponent(g, np.full(g.shape, 2.0), infinite=x >= 0.5)
    f = g.field(np.where(x < 0.5, 0.1, 3.0))
    # the sup part forces lambda >= 3; the L^2 part is tiny there
    assert luxemburg_norm(p, f) == pytest.approx(3.0, rel=1e-9)


def test_mixed_norm_closed_forms(unit_grid):
    g = unit_grid
    two = parse_exponent("2", g)
    one = g.field(np.ones(g.shape))
    assert mixed_norm(two, two, [one, one]) == pytest.approx(math.sqrt(2), rel=1e-10)
    x = g.coordinates()[0]
    f0 = g.field(np.exp(-((x - 0.3) ** 2) / 0.01))
    p = parse_exponent("2 + x", g)
    for q in ("0.5", "1", "3"):
        assert mixed_norm(p, parse_exponent(q, g), [f0]) == pytest.approx(luxemburg_norm(p, f0), rel=1e-9)


def test_mixed_norm_fast_path_matches_definition(unit_grid):
    g = unit_grid
    x = g.coordinates()[0]
    p = parse_exponent("2", g)
    q = parse_exponent("2 + smoothstep(0.3, 0.7, x)", g)
    fs = [g.field(np.exp(-((x - c) ** 2) / 0.02)) for c in (0.25, 0.7)]
    fast = mixed_norm(p, q, fs, tol=1e-12)
    slow = mixed_norm_reference(p, q, fs, tol=1e-12)
    assert fast == pytest.approx(slow, rel=1e-6)


def test_lp_tau_examples():
    g = Grid(1, 0, 8)
    p = parse_exponent("2", g)
    ones = g.field(np.ones(g.shape))
    assert lp_tau_norm(p, p, ones) == pytest.approx(1.0, rel=1e-10)
    assert lp_tau_norm(p, p, g.zeros()) == 0.0
    g2 = Grid(1, 1, 8)
    # cubes of volume >= 1: the two unit cells and the full box; |P|^{1/2 - 1/4}
    val = lp_tau_norm(parse_exponent("2", g2), parse_exponent("4", g2), g2.field(np.ones(g2.shape)))
    assert val == pytest.approx(max(1.0, 2.0**0.25), rel=1e-10)


def test_lp_tilde_examples(rng):
    g = Grid(1, 0, 8)
    x = g.coordinates()[0]
    p = parse_exponent("2 + x", g)
    f = g.field(np.cos(3 * x) + 2)
    assert lp_tilde_norm(p, f) == pytest.approx(luxemburg_norm(p, f), rel=1e-12)
    g2 = Grid(1, 1, 8)
    x2 = g2.coordinates()[0]
    p2 = parse_exponent("2", g2)
    f2 = g2.field(np.where(x2 < 1, 1 + x2, 0.0))
    cell = Grid(1, 0, 8).field((1 + x2[x2 < 1]))
    assert lp_tilde_norm(p2, f2) == pytest.approx(luxemburg_norm(parse_exponent("2", cell.grid), cell), rel=1e-12)
    g4 = Grid(1, 2, 8)
    p4 = parse_exponent("1.5 + 0.5*sin(x)", g4)
    data = rng.standard_normal(g4.shape)
    per = 2**8
    cells = []
    for k in range(4):
        sl = slice(k * per, (k + 1) * per)
        sub = Grid(1, 0, 8)
        cells.append(luxemburg_norm(VariableExponent(sub, p4.values[sl]), sub.field(data[sl])))
    assert lp_tilde_norm(p4, g4.field(data)) == pytest.approx(max(cells), rel=1e-9)


def test_chi_norm_examples():
    g = Grid(1, 0, 8)
    assert chi_norm(parse_exponent("2", g), DyadicCube(2, (1,), 0)) == pytest.approx(0.5, rel=1e-12)
    one = parse_exponent("1", g)
    for v in (0, 1, 3):
        assert chi_norm(one, DyadicCube(v, (0,), 0)) == pytest.approx(2.0**-v, rel=1e-12)


def test_chi_norm_bracket_for_variable_exponent():
    # ||chi_P|| compared with |P|^{1/p(x)} for x in P, all small cubes
    g = Grid(1, 0, 10)
    p = parse_exponent("2 + 0.8*sin(2*pi*x)", g)
    lo, hi = np.inf, 0.0
    for v in range(0, g.resolution_exponent - 1):
        chis = chi_norms_at_level(p, v)
        vals = p.values.reshape(len(chis), -1)
        vol = 2.0**-v
        ratios_hi = chis / vol ** (1 / vals.max(axis=1))
        ratios_lo = chis / vol ** (1 / vals.min(axis=1))
        lo, hi = min(lo, ratios_lo.min()), max(hi, ratios_hi.max())
    assert 0.25 < lo <= 1.0 <= hi < 4.0


def test_morrey_examples():
    g = Grid(1, 0, 10)
    x = g.coordinates()[0]
    f = g.field(np.sin(5 * x) + 0.3)
    lp = (np.sum(np.abs(f.data) ** 2.5) * g.cell_volume) ** (1 / 2.5)
    assert morrey_norm(2.5, 2.5, f) == pytest.approx(lp, rel=1e-10)
    assert morrey_norm(1.0, 2.0, g.zeros()) == 0.0
    assert morrey_norm(1.0, 2.0, g.field(np.ones(g.shape))) == pytest.approx(1.0, rel=1e-12)


@settings(max_examples=30, deadline=None)
@given(st.floats(1e-3, 1e3), st.integers(0, 2**31 - 1))
def test_luxemburg_homogeneous(scale, seed):
    g = Grid(1, 0, 8)
    x = g.coordinates()[0]
    p = VariableExponent(g, 1.5 + np.sin(2 * np.pi * x) ** 2)
    f = g.field(np.random.default_rng(seed).standard_normal(g.shape))
    a = luxemburg_norm(p, f, 1e-12)
    b = luxemburg_norm(p, g.field(scale * f.data), 1e-12)
    assert b == pytest.approx(scale * a, rel=1e-9)


@settings(max_examples=40, deadline=None)
@given(st.floats(0.3, 3.0), st.floats(-0.5, 0.5), st.integers(0, 2**31 - 1))
def test_unit_ball_property(base, width, seed):
    g = Grid(1, 0, 8)
    x = g.coordinates()[0]
    p = VariableExponent(g, base + abs(width) * (1 + np.cos(2 * np.pi * x)))
    data = np.random.default_rng(seed).standard_normal(g.shape)
    n = luxemburg_norm(p, g.field(data))
    for s in (0.5, 0.999, 1.001, 2.0):
        h = g.field(data * s / n)
        inside = luxemburg_norm(p, h) <= 1
        assert inside == (modular(p, h).value <= 1 + 1e-9)


def test_reference_evaluator_agrees(unit_grid):
    g = unit_grid
    x = g.coordinates()[0]
    p = parse_exponent("0.7 + x", g)
    f = g.field(np.exp(np.sin(7 * x)))
    assert luxemburg_norm(p, f, 1e-12) == pytest.approx(luxemburg_reference(p, f, 1e-12), rel=1e-9)
