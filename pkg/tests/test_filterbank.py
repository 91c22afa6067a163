import numpy as np
import pytest

from varbesov.corpus import band_limited_field, tone_field
from varbesov.filterbank import build_filterbank, calderon_residual, lp_block, lp_blocks
from varbesov.grid import Grid


def test_profile_values(desk_bank):
    b = desk_bank
    assert b.low_profile(0.0) == 1.0
    # u(3/5) = 1 and u(6/5) < 1, so the annulus symbol is positive at 3/5
    assert b.profile(0.6) == 1.0
    assert b.profile(1.2) < 1.0
    assert b.band_profile(0.6) > 0.0


@pytest.mark.parametrize("grid", [Grid(1, 4, 8), Grid(1, 0, 10), Grid(2, 2, 6)])
def test_calderon_identity(grid):
    assert calderon_residual(build_filterbank(grid)) <= 1e-12
    assert calderon_residual(build_filterbank(grid, 1.05, 1.75)) <= 1e-12


def test_calderon_by_direct_scan(desk_bank):
    b = desk_bank
    total = sum(b.symbol(v) ** 2 for v in range(b.max_level + 1))
    band = b.grid.frequency_magnitude() <= 1.1 * 2.0**b.max_level
    assert np.max(np.abs(total[band] - 1)) <= 1e-12


def test_low_band_field_has_no_fine_blocks(desk_grid, desk_bank):
    f = tone_field(desk_grid, 0.4)
    assert abs(2 * np.pi / desk_grid.box_length - 0.3927) < 1e-3
    for v in range(1, desk_bank.max_level + 1):
        assert np.max(np.abs(lp_block(f, desk_bank, v).data)) < 1e-13


def test_unit_tone_touches_only_low_levels(desk_grid, desk_bank):
    f = tone_field(desk_grid, 1.0)
    live = [v for v in range(desk_bank.max_level + 1) if np.max(np.abs(lp_block(f, desk_bank, v).data)) > 1e-12]
    assert live and set(live) <= {0, 1, 2}


def test_resummation_reproduces_band_limited_field(desk_grid, desk_bank, rng):
    V = desk_bank.max_level
    f = band_limited_field(desk_grid, rng, 2.0 ** (V - 1))
    blocks = lp_blocks(f, desk_bank)
    # phi_v * phi_v * f summed over v
    rec = sum(np.fft.ifftn(np.fft.fftn(b) * desk_bank.symbol(v)).real for v, b in enumerate(blocks))
    assert np.max(np.abs(rec - f.data)) / f.sup_norm() <= 1e-10


def test_kernel_is_real_and_even(desk_bank):
    k = desk_bank.kernel(2).data
    assert np.max(np.abs(np.imag(k))) < 1e-12
    assert np.allclose(np.real(k)[1:], np.real(k)[1:][::-1], atol=1e-12)
