"""Besov-type norms with variable smoothness and integrability.

Run with ``python3 demos/besov_norms.py``.
"""

import numpy as np

from varbesov.besov import (
    BesovParams,
    besov_cube_norm,
    besov_norm_sharp,
    besov_norm_star,
    besov_tilde_norm,
    besov_type_norm,
    classical_besov_type_norm,
)
from varbesov.corpus import band_limited_field, localized_field
from varbesov.filterbank import build_filterbank
from varbesov.grid import Grid

grid = Grid(1, 4, 8)
bank = build_filterbank(grid)
prm = BesovParams.from_expressions(bank, "0.5 + 0.2*sin(2*pi*x/16)", "2 + 0.5*cos(2*pi*x/16)", "2", "4")

rng = np.random.default_rng(1)
smooth = band_limited_field(grid, rng, 4.0)
bumpy = localized_field(grid, rng, 32.0)

for name, f in (("smooth", smooth), ("localized", bumpy)):
    res = besov_cube_norm(f, prm)
    cube = res.cube
    print(f"{name}: B-type norm {res.value:.4f}, attained on the cube of side {cube.side:g} at {cube.corner}")
    print(f"  tilde {besov_tilde_norm(f, prm):.4f}  sharp {besov_norm_sharp(f, prm):.4f}"
          f"  star(1) {besov_norm_star(f, prm, 1):.4f}  star(2) {besov_norm_star(f, prm, 2):.4f}")

# with constant exponents the fast evaluator agrees with a direct loop over cubes
const = BesovParams.from_expressions(bank, "0.75", "2", "3", "4")
fast = besov_type_norm(smooth, const, tol=1e-13)
slow = classical_besov_type_norm(smooth, 0.75, 2.0, 3.0, 0.25, bank)
print(f"constant exponents: fast {fast:.12f}, direct {slow:.12f}")
