"""Littlewood-Paley filter banks on the periodic grid.

The bank is built from one radial profile ``u`` that equals 1 on
``|xi| <= t1`` and 0 on ``|xi| >= t2``, with a C-infinity transition made
from the ``exp(-1/t)`` mollifier.  Then

* ``F Phi(xi) = u(|xi|)``,
* ``F phi(xi) = sqrt(u(|xi|)**2 - u(2|xi|)**2)``,

and the duals are the same functions.  Squares telescope, so
``F Phi(xi)**2 + sum_{j=1..V} F phi(2**-j xi)**2 = u(2**-V |xi|)**2``, which
is exactly 1 on ``|xi| <= t1 * 2**V``.

Frequencies are angular, ``xi = 2 pi k / 2**J0``, and the symbols act as
convolution multipliers: ``phi_v * f = ifft(F phi(2**-v xi) * fft(f))``.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field

import numpy as np

from .expression import smoothstep
from .grid import Grid, SampledField

__all__ = [
    "FilterBank",
    "build_filterbank",
    "lp_block",
    "lp_blocks",
    "calderon_residual",
]

DEFAULT_PROFILE = (1.1, 1.9)


@dataclass(frozen=True, eq=False)
class FilterBank:
    """Frequency-domain samples of Phi, phi (and the identical duals Psi, psi).

    Parameters
    ----------
    grid : Grid
    t1, t2 : float
        Profile thresholds; admissible when ``1 <= t1 < 6/5`` and ``5/3 < t2 <= 2``,
        which keeps the supports and positivity ranges required of Phi and phi.
    """

    grid: Grid
    t1: float = DEFAULT_PROFILE[0]
    t2: float = DEFAULT_PROFILE[1]
    _cache: dict = field(default_factory=dict, repr=False, compare=False)

    def __post_init__(self):
        if not (1.0 <= self.t1 < 1.2 and 5.0 / 3.0 < self.t2 <= 2.0 and self.t1 < self.t2):
            raise ValueError(
                f"profile ({self.t1}, {self.t2}) violates 1 <= t1 < 6/5 and 5/3 < t2 <= 2"
            )
        if self.grid.resolution_exponent < 4:
            raise ValueError("grid too coarse: need J >= 4 so that V = J - 2 >= 2")

    @property
    def max_level(self) -> int:
        return self.grid.max_level

    def describe(self) -> dict:
        return {"t1": self.t1, "t2": self.t2}

    # radial profiles
    def profile(self, rho):
        """The cut-off ``u``: 1 below ``t1``, 0 above ``t2``."""
        return 1.0 - smoothstep(self.t1, self.t2, rho)

    def low_profile(self, rho):
        """``F Phi`` as a function of ``|xi|``."""
        return self.profile(rho)

    def band_profile(self, rho):
        """``F phi`` as a function of ``|xi|``."""
        rho = np.asarray(rho, dtype=float)
        diff = self.profile(rho) ** 2 - self.profile(2 * rho) ** 2
        return np.sqrt(np.maximum(diff, 0.0))

    # symbols on the grid
    def _magnitude(self):
        if "xi" not in self._cache:
            self._cache["xi"] = self.grid.frequency_magnitude()
        return self._cache["xi"]

    def symbol(self, v: int) -> np.ndarray:
        """Multiplier of block ``v``: ``F Phi(xi)`` for ``v = 0``, ``F phi(2**-v xi)`` for ``v >= 1``."""
        if v < 0 or v > self.max_level:
            raise ValueError(f"level {v} outside the resolvable range 0..{self.max_level}")
        key = ("block", v)
        if key not in self._cache:
            xi = self._magnitude()
            sym = self.low_profile(xi) if v == 0 else self.band_profile(xi * 2.0**-v)
            sym.setflags(write=False)
            self._cache[key] = sym
        return self._cache[key]

    def band_symbol(self, j: int) -> np.ndarray:
        """``F phi(2**-j xi)`` for any integer ``j <= V`` (negative ``j`` dilates)."""
        if j > self.max_level:
            raise ValueError(f"level {j} above the resolvable range")
        key = ("band", j)
        if key not in self._cache:
            sym = self.band_profile(self._magnitude() * 2.0**-j)
            sym.setflags(write=False)
            self._cache[key] = sym
        return self._cache[key]

    def low_symbol(self, j: int = 0) -> np.ndarray:
        """``F Phi(2**-j xi)``; ``j = -gamma`` gives the dilated ``Phi_{-gamma}``."""
        if -j > self.grid.box_exponent:
            raise ValueError("dilated Phi does not fit the box")
        key = ("low", j)
        if key not in self._cache:
            sym = self.low_profile(self._magnitude() * 2.0**-j)
            sym.setflags(write=False)
            self._cache[key] = sym
        return self._cache[key]

    def kernel(self, v: int) -> SampledField:
        """Spatial samples of the (periodized) block kernel, ``phi_v`` or ``Phi``."""
        return self.grid.field(np.real(np.fft.ifftn(self.symbol(v))) / self.grid.cell_volume)


def build_filterbank(grid: Grid, t1: float = DEFAULT_PROFILE[0], t2: float = DEFAULT_PROFILE[1]) -> FilterBank:
    """Build the self-dual square-telescoping bank on ``grid``."""
    return FilterBank(grid, t1, t2)


def _apply(data: np.ndarray, symbol: np.ndarray, real: bool) -> np.ndarray:
    out = np.fft.ifftn(np.fft.fftn(data) * symbol)
    return out.real if real else out


def lp_block(f: SampledField, bank: FilterBank, v: int) -> SampledField:
    """``phi_v * f`` (``Phi * f`` at ``v = 0``) by frequency multiplication."""
    if f.grid != bank.grid:
        raise ValueError("field and filter bank live on different grids")
    return f.grid.field(_apply(f.data, bank.symbol(v), not f.is_complex))


def lp_blocks(f: SampledField, bank: FilterBank, levels=None) -> np.ndarray:
    """Stack of blocks for ``levels`` (default ``0..V``) from one forward FFT."""
    if f.grid != bank.grid:
        raise ValueError("field and filter bank live on different grids")
    levels = range(bank.max_level + 1) if levels is None else levels
    spec = np.fft.fftn(f.data)
    out = []
    for v in levels:
        block = np.fft.ifftn(spec * bank.symbol(v))
        out.append(block if f.is_complex else block.real)
    return np.stack(out)


def calderon_residual(bank: FilterBank) -> float:
    """``max |F Phi^2 + sum_j F phi(2^-j .)^2 - 1|`` over grid frequencies with ``|xi| <= 2**V``."""
    total = bank.symbol(0) ** 2
    for j in range(1, bank.max_level + 1):
        total = total + bank.symbol(j) ** 2
    band = bank._magnitude() <= 2.0**bank.max_level
    return float(np.max(np.abs(total[band] - 1.0)))
