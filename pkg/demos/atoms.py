"""Smooth atoms, block decay and atomic synthesis.

Run with ``python3 demos/atoms.py``.
"""

import numpy as np

from varbesov.atoms import atomic_synthesis, bump_family, make_bump_atoms, required_K_L, validate_atom, verify_fj_decay
from varbesov.besov import BesovParams
from varbesov.filterbank import build_filterbank
from varbesov.grid import Grid
from varbesov.sequences import CoefficientSequence

grid = Grid(1, 4, 8)
bank = build_filterbank(grid)
prm = BesovParams.from_expressions(bank, "0.5 + 0.2*sin(2*pi*x/16)", "2 + 0.5*cos(2*pi*x/16)", "2", "4")

# how smooth and how many vanishing moments the atoms need for these exponents
K_min, L_min = required_K_L(prm.alpha, prm.p, prm.tau)
print(f"atoms need K >= {K_min} and L >= {L_min}")

a = make_bump_atoms(grid, 2, (21,), 3, 1)
rep = validate_atom(a)
print(f"atom at Q_(2,21): passed={rep.passed}, derivative margin {rep.derivative_margin:.3f},"
      f" largest moment {rep.moment_max:.1e}")

# block sups against their explicit bounds, level by level
fj = verify_fj_decay(a, bank)
for j in sorted(fj["sups"]):
    print(f"  j={j}: sup {fj['sups'][j]:.3e}  bound {fj['bounds'][j]:.3e}")

# a random sparse sequence synthesized with two atom families
rng = np.random.default_rng(2)
entries = [(int(v), (int(rng.integers(0, 2 ** (4 + v))),), float(rng.standard_normal()))
           for v in rng.integers(0, 4, size=6)]
lam = CoefficientSequence.from_entries(grid, bank.max_level, entries)
for name, fam in (("plain", bump_family(3, max(L_min, -1))), ("moments", bump_family(3, 1))):
    _, info = atomic_synthesis(lam, fam, prm)
    print(f"{name:>8} atoms: ||f|| / ||lambda|| = {info['ratio']:.4f}")
