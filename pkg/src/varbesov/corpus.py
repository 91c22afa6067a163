"""Seeded test fields: band-limited noise, localized packets and pure tones."""

from __future__ import annotations

import numpy as np

from .grid import Grid, SampledField

__all__ = ["band_limited_field", "localized_field", "tone_field", "field_corpus"]


def _band_mask(grid: Grid, band: float):
    return grid.frequency_magnitude() <= band


def band_limited_field(grid: Grid, rng, band: float, decay: float = 1.0) -> SampledField:
    """Real random field with spectrum on ``|xi| <= band``, amplitudes ``(1+|xi|)**-decay``; sup norm 1."""
    xi = grid.frequency_magnitude()
    spec = (rng.standard_normal(grid.shape) + 1j * rng.standard_normal(grid.shape))
    spec *= _band_mask(grid, band) * (1.0 + xi) ** (-decay)
    data = np.fft.ifftn(spec).real
    peak = np.max(np.abs(data))
    return grid.field(data / peak if peak > 0 else data)


def localized_field(grid: Grid, rng, band: float, width: float | None = None) -> SampledField:
    """Band-limited noise under a Gaussian envelope at a random center, re-band-limited."""
    width = grid.box_length / 8 if width is None else width
    center = rng.uniform(0, grid.box_length, size=grid.dim)
    envelope = np.exp(-0.5 * (grid.periodic_distance(center) / width) ** 2)
    raw = band_limited_field(grid, rng, band, decay=0.5).data * envelope
    data = np.fft.ifftn(np.fft.fftn(raw) * _band_mask(grid, band)).real
    return grid.field(data / np.max(np.abs(data)))


def tone_field(grid: Grid, frequency: float, phase: float = 0.0) -> SampledField:
    """``cos(xi x_1 + phase)``, one angular frequency along the first axis (snapped to the grid)."""
    k = round(frequency * grid.box_length / (2 * np.pi))
    x = grid.coordinates()[0]
    return grid.field(np.cos(2 * np.pi * k * x / grid.box_length + phase))


def field_corpus(grid: Grid, rng, size: int, band: float) -> list:
    """``size`` fields alternating band-limited noise (two decay rates) and localized packets."""
    out = []
    for i in range(size):
        kind = i % 3
        if kind == 0:
            out.append(band_limited_field(grid, rng, band, decay=1.0))
        elif kind == 1:
            out.append(localized_field(grid, rng, band))
        else:
            out.append(band_limited_field(grid, rng, band, decay=0.0))
    return out
