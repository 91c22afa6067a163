"""Coefficient sequences, the phi-transform pair and sequence-space norms.

Coefficients use the normalization ``phi_{v,m}(x) = 2**(vn/2) phi(2**v x - m)``,
so ``<f, phi_{v,m}> = 2**(-vn/2) (phi_v * f)(2**-v m)`` for the even real
filters of :mod:`varbesov.filterbank`.  Level ``v`` of a sequence is a dense
complex array over the cube lattice of that level; the sparse view
(:meth:`CoefficientSequence.entries`) skips zeros.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from .cubenorms import cube_sup_norm
from .exponents import VariableExponent
from .filterbank import FilterBank
from .grid import Grid, SampledField, cubes_at_level, lattice_shape, level_blocks
from .varlp import DEFAULT_TOL, chi_norms_at_level

__all__ = [
    "CoefficientSequence",
    "phi_transform",
    "inverse_phi_transform",
    "step_fields",
    "seq_b_norm",
    "seq_b_tilde_norm",
    "lambda_star",
    "lambda_star_threshold",
    "sup_inf_sequences",
    "coefficient_bound_check",
]


def _stride(grid: Grid, v: int) -> int:
    return 2 ** (grid.resolution_exponent - v)


@dataclass(frozen=True, eq=False)
class CoefficientSequence:
    """``lambda_{v,m}`` for levels ``0..V`` on the cube lattices of ``grid``."""

    grid: Grid
    levels: tuple

    def __post_init__(self):
        levels = []
        for v, arr in enumerate(self.levels):
            arr = np.asarray(arr, dtype=complex)
            if arr.shape != lattice_shape(self.grid, v):
                raise ValueError(f"level {v} has shape {arr.shape}, expected {lattice_shape(self.grid, v)}")
            if not np.all(np.isfinite(arr)):
                raise ValueError("coefficients must be finite")
            levels.append(arr)
        object.__setattr__(self, "levels", tuple(levels))

    @classmethod
    def zeros(cls, grid: Grid, V: int):
        return cls(grid, tuple(np.zeros(lattice_shape(grid, v), dtype=complex) for v in range(V + 1)))

    @classmethod
    def from_entries(cls, grid: Grid, V: int, entries):
        """Build from ``(v, m, value)`` triples; unspecified entries are zero."""
        levels = [np.zeros(lattice_shape(grid, v), dtype=complex) for v in range(V + 1)]
        for v, m, value in entries:
            if not 0 <= v <= V:
                raise ValueError(f"level {v} outside 0..{V}")
            idx = tuple(int(i) for i in np.atleast_1d(m))
            shape = levels[v].shape
            if len(idx) != len(shape) or not all(0 <= i < s for i, s in zip(idx, shape)):
                raise ValueError(f"index {idx} outside the level-{v} lattice {shape}")
            levels[v][idx] = value
        return cls(grid, tuple(levels))

    @property
    def V(self) -> int:
        return len(self.levels) - 1

    def entries(self):
        """Non-zero ``(v, m, value)`` triples in level, then row-major order."""
        for v, arr in enumerate(self.levels):
            for m in zip(*np.nonzero(arr)):
                yield v, tuple(int(i) for i in m), complex(arr[m])

    def abs(self) -> "CoefficientSequence":
        return CoefficientSequence(self.grid, tuple(np.abs(a) for a in self.levels))

    def __add__(self, other):
        return CoefficientSequence(self.grid, tuple(a + b for a, b in zip(self.levels, other.levels)))

    def __mul__(self, c):
        return CoefficientSequence(self.grid, tuple(c * a for a in self.levels))

    __rmul__ = __mul__

    def max_abs(self) -> float:
        return max(float(np.max(np.abs(a))) for a in self.levels)


def phi_transform(f: SampledField, bank: FilterBank, V: int | None = None) -> CoefficientSequence:
    """Analysis coefficients ``<f, phi_{v,m}>`` (``<f, Phi_m>`` at level 0) by corner sampling."""
    if f.grid != bank.grid:
        raise ValueError("field and filter bank live on different grids")
    grid = f.grid
    V = bank.max_level if V is None else V
    spec = np.fft.fftn(f.data)
    out = []
    for v in range(V + 1):
        block = np.fft.ifftn(spec * bank.symbol(v))
        s = _stride(grid, v)
        corners = block[(slice(None, None, s),) * grid.dim]
        out.append(2.0 ** (-v * grid.dim / 2) * corners)
    return CoefficientSequence(grid, tuple(out))


def inverse_phi_transform(lam: CoefficientSequence, bank: FilterBank, real: bool | None = None) -> SampledField:
    """``T_psi lambda = sum_m lambda_{0,m} Psi_m + sum_{v>=1} sum_m lambda_{v,m} psi_{v,m}``.

    Each level places ``2**(-vn/2) lambda_{v,m} / h**n`` at the cube corners
    and filters with the dual symbol (equal to the analysis symbol here).
    ``real`` drops the imaginary part; by default it is dropped when every
    coefficient is real.
    """
    grid = lam.grid
    if grid != bank.grid:
        raise ValueError("sequence and filter bank live on different grids")
    if lam.V > bank.max_level:
        raise ValueError("sequence has more levels than the filter bank resolves")
    total = np.zeros(grid.shape, dtype=complex)
    for v, arr in enumerate(lam.levels):
        if not np.any(arr):
            continue
        s = _stride(grid, v)
        spikes = np.zeros(grid.shape, dtype=complex)
        spikes[(slice(None, None, s),) * grid.dim] = arr * 2.0 ** (-v * grid.dim / 2)
        total += np.fft.ifftn(np.fft.fftn(spikes) * bank.symbol(v))
    total /= grid.cell_volume
    if real is None:
        real = all(not np.any(a.imag) for a in lam.levels)
    return grid.field(total.real if real else total)


def step_fields(lam: CoefficientSequence, alpha: VariableExponent) -> np.ndarray:
    """Level functions ``sum_m 2**(v(alpha(x) + n/2)) |lambda_{v,m}| chi_{v,m}(x)``."""
    grid = lam.grid
    n = grid.dim
    out = []
    for v, arr in enumerate(lam.levels):
        s = _stride(grid, v)
        steps = np.abs(arr)
        for axis in range(n):
            steps = np.repeat(steps, s, axis=axis)
        out.append(2.0 ** (v * (alpha.values + n / 2)) * steps)
    return np.stack(out)


def seq_b_norm(lam, alpha, p, q, tau, tol=DEFAULT_TOL, threads=None) -> float:
    """Sequence-space norm with ``||chi_P||_tau`` normalization and windows ``v >= v_P+``."""
    mags = step_fields(lam, alpha)
    return cube_sup_norm(mags, range(lam.V + 1), p, q, normalization="tau", tau=tau, tol=tol, threads=threads).value


def seq_b_tilde_norm(lam, alpha, p, q, tol=DEFAULT_TOL, threads=None) -> float:
    """Sequence-space norm with pointwise ``|P|^{1/p(x)}`` normalization."""
    mags = step_fields(lam, alpha)
    return cube_sup_norm(mags, range(lam.V + 1), p, q, normalization="p", tol=tol, threads=threads).value


_DIRECT_LIMIT = 4096


def _lattice_decay(shape, v, d):
    """``(1 + 2**v |2**-v k|)**-d = (1 + |k|)**-d`` over periodic lattice offsets ``k``."""
    axes = []
    for size in shape:
        k = np.arange(size)
        axes.append(np.minimum(k, size - k).astype(float))
    grids = np.meshgrid(*axes, indexing="ij")
    return (1.0 + np.sqrt(sum(g**2 for g in grids))) ** (-d)


def lambda_star(lam: CoefficientSequence, r: float, d: float) -> CoefficientSequence:
    """``lambda*_{v,m} = (sum_h |lambda_{v,h}|^r (1 + |h - m|)^{-d})^{1/r}`` with periodic distance.

    Written as ``|lambda_{v,m}| (1 + rest / |lambda_{v,m}|^r)^{1/r}`` so that
    ``lambda* >= |lambda|`` holds exactly in floating point.
    """
    if r <= 0:
        raise ValueError("r must be positive")
    if d <= lam.grid.dim:
        raise ValueError("d must exceed the dimension")
    out = []
    for v, arr in enumerate(lam.levels):
        a = np.abs(arr) ** r
        kernel = _lattice_decay(arr.shape, v, d)
        if arr.size <= _DIRECT_LIMIT:
            flat = a.ravel()
            idx = np.array(list(np.ndindex(*arr.shape))) if arr.ndim > 1 else np.arange(arr.size)[:, None]
            diff = np.abs(idx[:, None, :] - idx[None, :, :])
            diff = np.minimum(diff, np.array(arr.shape) - diff)
            weights = (1.0 + np.sqrt(np.sum(diff.astype(float) ** 2, axis=-1))) ** (-d)
            np.fill_diagonal(weights, 0.0)
            rest = (weights @ flat).reshape(arr.shape)
        else:
            total = np.fft.ifftn(np.fft.fftn(a) * np.fft.fftn(kernel)).real
            rest = np.maximum(total - a, 0.0)
        absl = np.abs(arr)
        with np.errstate(divide="ignore", invalid="ignore"):
            star = np.where(absl > 0, absl * (1.0 + rest / np.where(absl > 0, a, 1.0)) ** (1.0 / r), rest ** (1.0 / r))
        out.append(star.astype(complex))
    return CoefficientSequence(lam.grid, tuple(out))


def lambda_star_threshold(alpha: VariableExponent, p: VariableExponent, q: VariableExponent,
                          tau: VariableExponent | None, r: float, tilde: bool = False) -> dict:
    """Threshold on ``d`` for the ``lambda*`` equivalence, from estimated exponent constants.

    ``a = r max(2 c_log(q) + c_log(alpha), 2 (1/q- - 1/q+) + alpha+ - alpha-)``
    and ``d > n + a + n/tau-`` (or ``n + a + c_log(1/p) + n/p-`` for the
    tilde space).  The ``c_log`` values are grid lower estimates, so the
    threshold is an estimate too.
    """
    from .exponents import clog_of_values

    n = alpha.grid.dim
    c_q = clog_of_values(q.grid, q.values)
    c_a = clog_of_values(alpha.grid, alpha.values)
    a = r * max(
        2 * c_q + c_a,
        2 * (1 / q.lower_bound - 1 / q.upper_bound) + alpha.upper_bound - alpha.lower_bound,
    )
    if tilde:
        threshold = n + a + clog_of_values(p.grid, p.reciprocal()) + n / p.lower_bound
    else:
        threshold = n + a + n / tau.lower_bound
    return {"a": a, "threshold": threshold}


def sup_inf_sequences(f: SampledField, bank: FilterBank, gamma: int, V: int | None = None):
    """The ``sup`` and ``inf_gamma`` sequences of the block magnitudes over cubes.

    ``sup_{v,m} = 2**(-vn/2) max_{y in Q_{v,m}} |phi_v * f(y)|`` and
    ``inf_{v,m,gamma} = 2**(-vn/2) max_h min_{y in Q_{v+gamma,h}} |phi_v * f(y)|``
    over the subcubes ``Q_{v+gamma,h}`` of ``Q_{v,m}``.
    """
    grid = f.grid
    V = bank.max_level if V is None else V
    if gamma < 0 or V + gamma > grid.resolution_exponent:
        raise ValueError(f"gamma must satisfy 0 <= gamma <= {grid.resolution_exponent - V}")
    spec = np.fft.fftn(f.data)
    sups, infs = [], []
    n = grid.dim
    for v in range(V + 1):
        block = np.abs(np.fft.ifftn(spec * bank.symbol(v)))
        scale = 2.0 ** (-v * n / 2)
        sups.append(scale * level_blocks(block, grid, v).max(axis=-1).reshape(lattice_shape(grid, v)))
        fine = level_blocks(block, grid, v + gamma).min(axis=-1).reshape(lattice_shape(grid, v + gamma))
        per = 2**gamma
        if n == 1:
            coarse = fine.reshape(-1, per).max(axis=-1)
        else:
            side = fine.shape[0] // per
            coarse = fine.reshape(side, per, side, per).max(axis=(1, 3))
        infs.append(scale * coarse)
    return CoefficientSequence(grid, tuple(sups)), CoefficientSequence(grid, tuple(infs))


def coefficient_bound_check(lam: CoefficientSequence, alpha, p, q, tau=None, tilde: bool = False,
                            tol=DEFAULT_TOL) -> dict:
    """Scan ``|lambda_{v,m}|`` against the single-coefficient bound.

    For the ``b`` space the right-hand side without its constant is
    ``2**(-v(alpha(x)+n/2)) ||lambda||_b ||chi_{v,m}||_tau / ||chi_{v,m}||_p``;
    for ``b-tilde`` it is ``2**(-v(alpha(x)+n/2)) ||lambda||``.  The worst
    ``x`` in ``Q_{v,m}`` is the one maximizing ``alpha``.  Testing the norm on
    ``P = Q_{v,m}`` alone shows the constant ``2**(v osc_Q alpha)`` always
    suffices, so the check also reports the ratio with that factor removed,
    which must not exceed 1.
    """
    grid = lam.grid
    n = grid.dim
    if tilde:
        norm = seq_b_tilde_norm(lam, alpha, p, q, tol)
    else:
        norm = seq_b_norm(lam, alpha, p, q, tau, tol)
    if norm == 0:
        return {"norm": 0.0, "max_ratio": 0.0, "max_adjusted_ratio": 0.0, "passed": True}
    worst = worst_adj = 0.0
    for v, arr in enumerate(lam.levels):
        a_blocks = level_blocks(alpha.values, grid, v)
        a_hi = a_blocks.max(axis=-1)
        a_lo = a_blocks.min(axis=-1)
        rhs = 2.0 ** (-v * (a_hi + n / 2)) * norm
        if not tilde:
            rhs = rhs * chi_norms_at_level(tau, v) / chi_norms_at_level(p, v)
        ratio = np.abs(arr).ravel() / rhs
        worst = max(worst, float(ratio.max()))
        worst_adj = max(worst_adj, float(np.max(ratio * 2.0 ** (-v * (a_hi - a_lo)))))
    return {
        "norm": norm,
        "max_ratio": worst,
        "max_adjusted_ratio": worst_adj,
        "passed": bool(np.isfinite(worst) and worst_adj <= 1 + 1e-8),
    }
