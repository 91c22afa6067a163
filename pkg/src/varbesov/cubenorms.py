"""Cube-sup mixed norms of level sequences.

Given non-negative level functions ``f_j`` (index ``j`` may be negative for
dilated low-pass blocks), the engine evaluates

    sup_P || ( w_P(x) f_j chi_P )_{j >= start(P)} ||_{l^{q}(L^{p})}

over the dyadic cubes of the box, where ``w_P`` is one of

* ``1 / ||chi_P||_{tau}`` (``normalization="tau"``),
* ``|P|^{-1/p(x)}`` (``normalization="p"``),
* ``1`` (``normalization="none"``),

and ``start(P)`` is ``max(v_P, 0) - shift`` (``window="plus"``) or
``v_P - shift`` (``window="sharp"``, cubes with ``|P| <= 1`` only).  All cubes of one level are solved in a
single batched call; levels may be spread over worker threads.
"""

from __future__ import annotations

import math
import os
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass

import numpy as np

from .exponents import VariableExponent
from .grid import DyadicCube, Grid, lattice_shape, level_blocks
from .varlp import DEFAULT_TOL, _log_abs, _log_mixed, _q_argument, chi_norms_at_level

__all__ = ["CubeSupResult", "cube_sup_norm", "resolve_threads"]


@dataclass(frozen=True)
class CubeSupResult:
    """Value of a cube-sup norm with the maximizing cube (None for a zero input)."""

    value: float
    cube: DyadicCube | None
    level_maxima: dict

    def __float__(self):
        return self.value


def resolve_threads(threads=None) -> int:
    """Worker count: explicit argument, else ``VARBESOV_THREADS``, else 1."""
    if threads is None:
        env = os.environ.get("VARBESOV_THREADS")
        threads = int(env) if env else 1
    return max(1, int(threads))


def _default_cube_levels(grid: Grid, top_index: int, window: str):
    low = 0 if window == "sharp" else -grid.box_exponent
    return list(range(low, min(grid.resolution_exponent, top_index) + 1))


def cube_sup_norm(
    mags,
    indices,
    p: VariableExponent,
    q: VariableExponent,
    *,
    normalization: str = "tau",
    tau: VariableExponent | None = None,
    window: str = "plus",
    shift: int = 0,
    cube_levels=None,
    tol: float = DEFAULT_TOL,
    threads=None,
) -> CubeSupResult:
    """Evaluate the cube-sup mixed norm of a stack of level magnitudes.

    Parameters
    ----------
    mags : ndarray, shape (L,) + grid.shape
        Non-negative level functions.
    indices : sequence of int
        Level index of each row of ``mags``.
    p, q : VariableExponent
    normalization : {"tau", "p", "none"}
    tau : VariableExponent
        Needed for ``normalization="tau"``.
    window : {"plus", "sharp"}
    shift : int
        Extends every window downward: ``start = max(v_P, 0) - shift``
        (``"plus"``) or ``v_P - shift`` (``"sharp"``).
    cube_levels : sequence of int, optional
        Cube levels forming the family; defaults to every level whose window
        is non-empty.
    """
    grid = p.grid
    mags = np.asarray(mags)
    indices = np.asarray(list(indices), dtype=int)
    if mags.shape != (len(indices),) + grid.shape:
        raise ValueError("level stack does not match the index list and grid")
    if normalization == "tau" and tau is None:
        raise ValueError("tau normalization needs a tau exponent")
    if normalization not in ("tau", "p", "none"):
        raise ValueError(f"unknown normalization {normalization!r}")
    if window not in ("plus", "sharp"):
        raise ValueError(f"unknown window {window!r}")
    if len(indices) == 0:
        raise ValueError("empty level range")
    if cube_levels is None:
        cube_levels = _default_cube_levels(grid, int(indices.max()), window)

    qv, q_inf = _q_argument(q)
    logm = _log_abs(mags)
    lw = math.log(grid.cell_volume)
    p_vals = np.broadcast_to(p.values, grid.shape)
    recip = p.reciprocal()

    def one_level(vP):
        start = (vP if window == "sharp" else max(vP, 0)) - shift
        rows = np.nonzero(indices >= start)[0]
        if rows.size == 0:
            return vP, -np.inf, 0
        blocks = np.swapaxes(level_blocks(logm[rows], grid, vP), 0, 1)  # (cubes, k, pts)
        if normalization == "tau":
            chi = chi_norms_at_level(tau, vP)
            blocks = blocks - np.log(chi)[:, None, None]
        elif normalization == "p":
            log_vol = -vP * grid.dim * math.log(2.0)
            blocks = blocks - (log_vol * level_blocks(recip, grid, vP))[:, None, :]
        pb = level_blocks(p_vals, grid, vP)[:, None, :]
        pinf = level_blocks(p.infinite, grid, vP)[:, None, :] if p.has_infinity else None
        qb = qv
        if not q_inf and not np.isscalar(qv):
            qb = level_blocks(qv, grid, vP)[:, None, :]
        t = _log_mixed(blocks, pb, pinf, qb, q_inf, lw, tol)
        k = int(np.argmax(t))
        return vP, float(t[k]), k

    workers = resolve_threads(threads)
    if workers > 1 and len(cube_levels) > 1:
        with ThreadPoolExecutor(max_workers=workers) as pool:
            results = list(pool.map(one_level, cube_levels))
    else:
        results = [one_level(v) for v in cube_levels]

    best_t, best_cube = -np.inf, None
    maxima = {}
    for vP, t, k in results:
        maxima[vP] = float(np.exp(t))
        if t > best_t:
            m = np.unravel_index(k, lattice_shape(grid, vP))
            best_t, best_cube = t, DyadicCube(vP, tuple(int(i) for i in m), grid.box_exponent)
    return CubeSupResult(float(np.exp(best_t)), best_cube, maxima)
