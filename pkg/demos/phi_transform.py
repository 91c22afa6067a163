"""Littlewood-Paley blocks, the Calderon identity and the phi-transform.

Run with ``python3 demos/phi_transform.py``.
"""

import numpy as np

from varbesov.corpus import band_limited_field
from varbesov.filterbank import build_filterbank, calderon_residual, lp_blocks
from varbesov.grid import Grid
from varbesov.sequences import CoefficientSequence, inverse_phi_transform, lambda_star, phi_transform

# box of side 16 with 4096 samples; the bank resolves levels 0..6
grid = Grid(1, 4, 8)
bank = build_filterbank(grid)
print(f"levels 0..{bank.max_level}, Calderon residual {calderon_residual(bank):.1e}")

rng = np.random.default_rng(0)
f = band_limited_field(grid, rng, 2.0 ** (bank.max_level - 1))

# energy per dyadic frequency band
blocks = lp_blocks(f, bank)
for v, b in enumerate(blocks):
    print(f"  level {v}: sup |phi_v * f| = {np.max(np.abs(b)):.4f}")

# analysis then synthesis returns the field to round-off
lam = phi_transform(f, bank)
rec = inverse_phi_transform(lam, bank)
print(f"reconstruction error {np.max(np.abs(rec.data - f.data)) / f.sup_norm():.1e}")
print(f"coefficients per level: {[a.size for a in lam.levels]}")

# a single coefficient synthesizes one translate of psi
one = CoefficientSequence.from_entries(grid, bank.max_level, [(3, (40,), 1.0)])
psi = inverse_phi_transform(one, bank).data
peak = int(np.argmax(np.abs(psi)))
print(f"psi_(3,40) peaks at x = {grid.coordinates()[0][peak]:.3f} (cube corner {40 / 8:.3f})")

# the maximal rearrangement spreads each entry with polynomial decay
star = lambda_star(one, r=0.5, d=2.5)
print("lambda* around the entry:", np.round(star.levels[3][37:44].real, 4))
