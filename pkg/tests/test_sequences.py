import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from varbesov.corpus import band_limited_field, tone_field
from varbesov.exponents import VariableExponent, parse_exponent
from varbesov.filterbank import build_filterbank
from varbesov.grid import Grid
from varbesov.sequences import (
    CoefficientSequence,
    coefficient_bound_check,
    inverse_phi_transform,
    lambda_star,
    lambda_star_threshold,
    phi_transform,
    seq_b_norm,
    seq_b_tilde_norm,
    sup_inf_sequences,
)


def const(grid, x, cls="P0"):
    return VariableExponent.constant(grid, x, cls)


def test_transform_of_zero(desk_grid, desk_bank):
    lam = phi_transform(desk_grid.zeros(), desk_bank)
    assert lam.max_abs() == 0.0
    assert list(lam.entries()) == []
    assert np.all(inverse_phi_transform(lam, desk_bank).data == 0.0)


def test_low_band_field_only_touches_coarse_levels(desk_grid, desk_bank):
    lam = phi_transform(tone_field(desk_grid, 0.4), desk_bank)
    assert lam.levels[0].any()
    for v in range(2, lam.V + 1):
        assert np.max(np.abs(lam.levels[v])) < 1e-13


def test_coefficients_match_direct_inner_products(desk_grid, desk_bank, rng):
    g = desk_grid
    f = band_limited_field(g, rng, 16.0)
    lam = phi_transform(f, desk_bank)
    for _ in range(10):
        v = int(rng.integers(0, desk_bank.max_level + 1))
        m = int(rng.integers(0, 2 ** (g.box_exponent + v)))
        # <f, phi_{v,m}> = 2^{-v/2} int f(x) phi_v(x - x_Q) dx, phi_v real and even
        phi_v = desk_bank.kernel(v).data.real
        shift = m * 2 ** (g.resolution_exponent - v)
        direct = 2.0 ** (-v / 2) * np.sum(f.data * np.roll(phi_v, shift)) * g.cell_volume
        assert abs(lam.levels[v][m] - direct) <= 1e-10 * max(1.0, abs(direct))


def test_single_entry_synthesizes_psi(desk_grid, desk_bank):
    lam = CoefficientSequence.from_entries(desk_grid, desk_bank.max_level, [(1, (0,), 1.0)])
    psi = inverse_phi_transform(lam, desk_bank).data
    assert np.max(np.abs(psi - 2.0**-0.5 * desk_bank.kernel(1).data.real)) <= 1e-12


@pytest.mark.parametrize("grid", [Grid(1, 4, 8), Grid(2, 2, 6)])
def test_reconstruction(grid, rng):
    bank = build_filterbank(grid)
    f = band_limited_field(grid, rng, 2.0 ** (bank.max_level - 1))
    rec = inverse_phi_transform(phi_transform(f, bank), bank)
    assert np.max(np.abs(rec.data - f.data)) / f.sup_norm() <= 1e-6


def test_sequence_validation(desk_grid):
    with pytest.raises(ValueError):
        CoefficientSequence(desk_grid, (np.zeros(3),))
    with pytest.raises(ValueError):
        CoefficientSequence.from_entries(desk_grid, 2, [(1, (10_000,), 1.0)])
    with pytest.raises(ValueError):
        CoefficientSequence.from_entries(desk_grid, 2, [(0, (0,), np.nan)])


def test_norms_of_zero(desk_grid):
    g = desk_grid
    lam = CoefficientSequence.zeros(g, 4)
    a, p, q = const(g, 0.5, "real"), const(g, 2.0), const(g, 2.0)
    assert seq_b_norm(lam, a, p, q, const(g, 4.0)) == 0.0
    assert seq_b_tilde_norm(lam, a, p, q) == 0.0


def test_single_entry_closed_forms():
    g = Grid(1, 2, 8)
    alpha, p, q, tau = 0.5, 2.0, 2.0, 4.0
    A, Pp, Q, T = const(g, alpha, "real"), const(g, p), const(g, q), const(g, tau)
    # level 0: the cubes containing Q_{0,0} with v_P <= 0 give 1/|P|^{1/tau}, largest at |P| = 1
    lam0 = CoefficientSequence.from_entries(g, 3, [(0, (0,), 1.0)])
    assert seq_b_norm(lam0, A, Pp, Q, T, tol=1e-13) == pytest.approx(1.0, rel=1e-10)
    # level 1: the step 2^{alpha + 1/2} chi_{Q_{1,0}}; best cube is Q_{1,0} itself,
    # 2^{-1/p} / 2^{-1/tau}, against 2^{-1/p} for the unit cube
    lam1 = CoefficientSequence.from_entries(g, 3, [(1, (0,), 1.0)])
    expected = 2.0 ** (alpha + 0.5) * max(2.0 ** (1 / tau - 1 / p), 2.0 ** (-1 / p))
    assert seq_b_norm(lam1, A, Pp, Q, T, tol=1e-13) == pytest.approx(expected, rel=1e-10)
    # tilde: |P|^{-1/p} normalization over |P| <= 1, the cube Q_{1,0} gives exactly the step height
    assert seq_b_tilde_norm(lam1, A, Pp, Q, tol=1e-13) == pytest.approx(2.0 ** (alpha + 0.5), rel=1e-10)


@settings(max_examples=15, deadline=None)
@given(st.floats(1e-3, 1e3), st.integers(0, 2**31 - 1))
def test_sequence_norm_homogeneity(scale, seed):
    g = Grid(1, 2, 7)
    r = np.random.default_rng(seed)
    lam = CoefficientSequence(g, tuple(r.standard_normal(2 ** (2 + v)) for v in range(4)))
    a = parse_exponent("0.3 + 0.1*sin(x)", g, "real")
    p, q, tau = parse_exponent("2 + 0.5*cos(x)", g), const(g, 1.5), const(g, 3.0)
    base = seq_b_norm(lam, a, p, q, tau, tol=1e-13)
    scaled = CoefficientSequence(g, tuple(scale * x for x in lam.levels))
    assert seq_b_norm(scaled, a, p, q, tau, tol=1e-13) == pytest.approx(scale * base, rel=1e-9)


def test_lambda_star_single_entry(desk_grid):
    h0, v, r, d = 5, 3, 0.5, 2.5
    lam = CoefficientSequence.from_entries(desk_grid, 4, [(v, (h0,), 1.0)])
    star = lambda_star(lam, r, d).levels[v].real
    size = star.size
    k = np.abs(np.arange(size) - h0)
    k = np.minimum(k, size - k)
    assert np.allclose(star, (1.0 + k) ** (-d / r), rtol=1e-12, atol=0)


@settings(max_examples=15, deadline=None)
@given(st.floats(0.3, 1.0), st.floats(1.2, 6.0), st.integers(0, 2**31 - 1))
def test_lambda_star_dominates_and_decreases(r, d, seed):
    g = Grid(1, 2, 8)
    rr = np.random.default_rng(seed)
    lam = CoefficientSequence(g, tuple(rr.standard_normal(2 ** (2 + v)) * (rr.random(2 ** (2 + v)) < 0.5) for v in range(5)))
    s1 = lambda_star(lam, r, d)
    s2 = lambda_star(lam, r, d + 1.0)
    for a, b, c in zip(lam.levels, s1.levels, s2.levels):
        assert np.all(b.real >= np.abs(a))
        assert np.all(c.real <= b.real * (1 + 1e-12))


def test_lambda_star_direct_and_fft_paths_agree():
    g = Grid(1, 3, 13)  # level 10 has 8192 cubes and takes the FFT path
    rr = np.random.default_rng(4)
    arr = rr.standard_normal(2**13)
    lam = CoefficientSequence(g, tuple([np.zeros(2 ** (3 + v)) for v in range(10)] + [arr]))
    fast = lambda_star(lam, 0.5, 2.0).levels[10].real
    idx = np.arange(arr.size)
    sample = rr.choice(arr.size, 5, replace=False)
    for m in sample:
        k = np.abs(idx - m)
        k = np.minimum(k, arr.size - k)
        ref = np.sum(np.abs(arr) ** 0.5 * (1.0 + k) ** -2.0) ** 2.0
        assert fast[m] == pytest.approx(ref, rel=1e-9)


def test_lambda_star_rejects_small_d(desk_grid):
    with pytest.raises(ValueError):
        lambda_star(CoefficientSequence.zeros(desk_grid, 2), 0.5, 1.0)


def test_lambda_star_threshold_constant_exponents():
    g = Grid(1, 2, 8)
    th = lambda_star_threshold(const(g, 0.5, "real"), const(g, 2.0), const(g, 2.0), const(g, 4.0), 0.5)
    assert th["a"] == pytest.approx(0.0, abs=1e-12)
    assert th["threshold"] == pytest.approx(1 + 0 + 1 / 4)


def test_sup_inf_of_constant(desk_grid, desk_bank):
    f = desk_grid.field(np.full(desk_grid.shape, 3.0))
    sup, inf = sup_inf_sequences(f, desk_bank, 1)
    for v in range(1, sup.V + 1):
        assert np.max(np.abs(sup.levels[v])) < 1e-12
        assert np.max(np.abs(inf.levels[v])) < 1e-12
    assert np.all(inf.levels[0].real <= sup.levels[0].real)


def test_sup_inf_order(desk_grid, desk_bank, rng):
    f = band_limited_field(desk_grid, rng, 16.0)
    for gamma in (1, 2):
        sup, inf = sup_inf_sequences(f, desk_bank, gamma)
        lam = phi_transform(f, desk_bank)
        for a, s, i in zip(lam.levels, sup.levels, inf.levels):
            assert np.all(i.real <= s.real + 1e-15)
            assert np.all(np.abs(a) <= s.real * (1 + 1e-12) + 1e-15)


def test_coefficient_bound(desk_grid, desk_bank, rng):
    g = desk_grid
    a = parse_exponent("0.5 + 0.2*sin(2*pi*x/16)", g, "real")
    p = parse_exponent("2 + 0.5*cos(2*pi*x/16)", g)
    q, tau = const(g, 2.0), const(g, 4.0)
    assert coefficient_bound_check(CoefficientSequence.zeros(g, 4), a, p, q, tau)["passed"]
    single = CoefficientSequence.from_entries(g, 4, [(2, (7,), 1.0)])
    rep = coefficient_bound_check(single, a, p, q, tau)
    assert rep["passed"] and rep["max_adjusted_ratio"] <= 1 + 1e-9
    lam = phi_transform(band_limited_field(g, rng, 16.0), desk_bank)
    for tilde in (False, True):
        rep = coefficient_bound_check(lam, a, p, q, tau, tilde=tilde)
        assert rep["passed"]
