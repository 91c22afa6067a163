import math

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from varbesov.corpus import band_limited_field
from varbesov.exponents import VariableExponent
from varbesov.grid import Grid, integrate
from varbesov.kernels import (
    convolve,
    eta,
    eta_field,
    hardy_cascade,
    hardy_constant,
    level_mixing_constant,
    maximal_function,
    maximal_majorant_constant,
    verify_eta_lemmas,
    verify_hardy,
    verify_r_trick,
    weighted_level_sum,
)


def test_eta_values():
    for m in (1.5, 3.0, 10.0):
        assert eta(0, m, 0.0) == 1.0
    assert eta(2, 3.0, 0.25) == pytest.approx(0.5)


def test_eta_integral_tends_to_two():
    # 2 int_0^L (1 + u)^-2 du = 2 - 2/(1 + L) on a box of half-width L
    for v in (0, 2, 4):
        g = Grid(1, 8, 10)
        val = integrate(eta_field(g, v, 2.0))
        half = g.box_length / 2 * 2.0**v
        assert val == pytest.approx(2 - 2 / (1 + half), rel=2e-3)


def test_convolution_identity_and_hat():
    g = Grid(1, 0, 9)
    x = g.coordinates()[0]
    f = g.field(np.sin(2 * np.pi * 3 * x) + x**2)
    delta = np.zeros(g.shape)
    delta[0] = 1 / g.spacing
    assert np.max(np.abs(convolve(f, g.field(delta)).data - f.data)) < 1e-10
    chi = g.field((x < 0.5).astype(float))
    hat = convolve(chi, chi).data.real
    assert hat.max() == pytest.approx(0.5, abs=g.spacing)
    # the hat peaks at lag 1/2 and vanishes at lags 0 and 1
    assert abs(hat[0]) < 2 * g.spacing


def test_gaussian_convolution():
    g = Grid(1, 3, 7)
    d = g.periodic_distance(0.0)
    s1, s2 = 0.2, 0.35

    def gauss(s):
        return np.exp(-(d**2) / (2 * s**2)) / (s * math.sqrt(2 * math.pi))

    out = convolve(g.field(gauss(s1)), g.field(gauss(s2))).data.real
    ref = gauss(math.hypot(s1, s2))
    assert np.max(np.abs(out - ref)) / ref.max() < 1e-6


def test_maximal_function_constant_and_spike():
    g = Grid(1, 2, 8)
    assert np.allclose(maximal_function(g.field(np.full(g.shape, 2.5))).data, 2.5)
    spike = np.zeros(g.shape)
    spike[0] = 1 / g.spacing
    M = maximal_function(g.field(spike)).data
    for k in (8, 32, 128):
        dist = k * g.spacing
        assert 0.5 / (2 * dist) <= M[k] <= 2 / (2 * dist)
    # M f >= |f| everywhere
    f = g.field(np.random.default_rng(1).standard_normal(g.shape))
    assert np.all(maximal_function(f).data >= np.abs(f.data) - 1e-12)


def test_majorant_property(rng):
    g = Grid(1, 2, 8)
    f = g.field(np.abs(rng.standard_normal(g.shape)))
    for v in (0, 3):
        ker = eta_field(g, v, 3.0)
        c = maximal_majorant_constant(g, ker)
        lhs = convolve(f, ker).data.real
        assert np.all(lhs <= c * maximal_function(f).data * (1 + 1e-9))


def test_weighted_level_sum_examples(rng):
    g = Grid(1, 0, 6)
    one = g.field(np.ones(g.shape))
    zero = g.zeros()
    gs = weighted_level_sum([one] + [zero] * 5, 1.0)
    for v, gv in enumerate(gs):
        assert np.allclose(gv.data, 2.0**-v)
    gs = weighted_level_sum([one] * 40, 1.0)
    # sum_{k<=v} 2^{-(v-k)} + sum_{k>v} 2^{-(k-v)} -> 2 - 2^{-v} + 1 in the interior
    assert np.allclose(gs[20].data, 3.0, atol=1e-5)
    assert np.allclose(gs[0].data, 2.0, atol=1e-10)
    fs = [g.field(rng.standard_normal(g.shape)) for _ in range(7)]
    gs = weighted_level_sum(fs, 0.7)
    for v in range(7):
        ref = sum(2.0 ** (-abs(k - v) * 0.7) * fs[k].data for k in range(7))
        assert np.max(np.abs(gs[v].data - ref)) < 1e-12


def test_hardy_examples():
    res = hardy_cascade(np.ones(8), 0.5, 0, 1.0)
    assert np.allclose(res.deltas, [2 - 2.0**-k for k in range(8)])
    eps = np.zeros(10)
    eps[4] = 1.0
    res = hardy_cascade(eps, 0.5, 4, 2.0)
    assert np.allclose(res.deltas[4:], 0.5 ** np.arange(6))
    assert res.bound_ok
    series = math.sqrt(sum(0.25**i for i in range(200)))
    assert series <= hardy_constant(0.5, 2.0) * (1 + 1e-12)


def test_hardy_randomized_has_no_violations(rng):
    rep = verify_hardy(rng, trials=2000)
    assert all(r["violations"] == 0 for r in rep.values())


@settings(max_examples=25, deadline=None)
@given(st.floats(0.05, 0.95), st.floats(0.3, 4.0), st.integers(0, 2**31 - 1))
def test_hardy_bound_random(a, q, seed):
    eps = np.random.default_rng(seed).exponential(size=16)
    res = hardy_cascade(eps, a, 0, q)
    assert res.bound_ok


def test_eta_lemmas_constant_alpha_shift_is_exact(desk_grid):
    alpha = VariableExponent.constant(desk_grid, 0.7, "real")
    rep = verify_eta_lemmas(desk_grid, range(0, 5), 3.0, 0.5, alpha=alpha)
    lo, hi = rep["smoothness_shift"].bracket
    assert hi == pytest.approx(1.0)
    assert rep["smoothness_shift"].passed
    # equal levels: the bracket of the two-kernel estimate contains 1
    two = rep["two_kernels"]
    same = [(lo, hi) for key, (grp, lo, hi) in two.pairs.items() if grp == 0]
    assert same and all(lo <= 1 <= hi for lo, hi in same)


def test_eta_lemmas_pass_on_desk_grid(desk_grid):
    rep = verify_eta_lemmas(desk_grid, range(0, 6), 3.0, 0.5)
    for key in ("two_kernels", "cube_average", "r_power", "smoothness_shift"):
        assert rep[key].passed, key


def test_r_trick_zero_and_bounded(desk_grid, rng):
    g = desk_grid
    rep = verify_r_trick(g.zeros(), (8.0, 2.0, 32.0), 8.0, 0.5, 2.0)
    assert all(v == 0.0 for v in rep["ratios"].values())
    f = band_limited_field(g, rng, 8.0, decay=0.0)
    rep = verify_r_trick(f, (8.0, 2.0, 32.0), 8.0, 0.5, 2.0)
    c = rep["ratios"][8.0]
    assert 0 < c < np.inf
    assert max(rep["ratios"].values()) <= 2 * c
    rep1 = verify_r_trick(f, (8.0,), 8.0, 1.0, 2.0)
    assert np.isfinite(rep1["ratios"][8.0])


def test_level_mixing_constant_limits():
    assert level_mixing_constant(40.0, 0.5, 2.0) == pytest.approx(1.0, abs=1e-9)
    with pytest.raises(ValueError):
        level_mixing_constant(0.5, 0.5, 2.0)
    assert level_mixing_constant(1.0, 0.25, 2.0) > level_mixing_constant(2.0, 0.25, 2.0)
