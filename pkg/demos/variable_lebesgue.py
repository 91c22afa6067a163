"""Variable-exponent Lebesgue norms on a periodic grid.

Run with ``python3 demos/variable_lebesgue.py``.
"""

import numpy as np

from varbesov.exponents import estimate_clog, parse_exponent
from varbesov.grid import Grid
from varbesov.varlp import luxemburg_norm, mixed_norm, modular

# the unit interval sampled at 1024 points
grid = Grid(1, 0, 10)
x = grid.coordinates()[0]

# an exponent that moves smoothly between 1.5 and 3.5
p = parse_exponent("2.5 + sin(2*pi*x)", grid)
print(f"p ranges over [{p.lower_bound:.3f}, {p.upper_bound:.3f}]")
print(f"estimated log-Hoelder constant: {estimate_clog(p):.3f}")

f = grid.field(np.exp(np.cos(6 * np.pi * x)))

# the Luxemburg norm is the unique lambda with modular(f / lambda) = 1
lam = luxemburg_norm(p, f, tol=1e-12)
print(f"||f||_p(.) = {lam:.10f}")
for s in (0.99, 1.0, 1.01):
    rho = modular(p, grid.field(f.data * s / lam)).value
    print(f"  modular of {s:4.2f} f/||f|| = {rho:.6f}")

# constant exponent: the Luxemburg norm is the ordinary L^p norm
p3 = parse_exponent("3", grid)
direct = (np.sum(np.abs(f.data) ** 3) * grid.cell_volume) ** (1 / 3)
print(f"p = 3: luxemburg {luxemburg_norm(p3, f, 1e-13):.12f}, direct {direct:.12f}")

# mixed norm of a short sequence of fields, for constant and variable q
fs = [grid.field(np.exp(-((x - c) ** 2) / 0.005)) for c in (0.2, 0.5, 0.8)]
for q_text in ("1", "2", "2.5 + sin(2*pi*x)"):
    q = parse_exponent(q_text, grid)
    print(f"mixed norm with q = {q_text:>18}: {mixed_norm(p, q, fs):.6f}")
