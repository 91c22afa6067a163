"""Variable Lebesgue modulars and norms, the mixed space l^q(L^p), and Morrey norms.

All root finding works on ``t = log(lambda)``.  For a fixed field the
log-modular ``F(t) = log sum_i w |f_i|^{p_i} e^{-p_i t}`` is convex and
decreasing with slope between ``-p+`` and ``-p-``.  Newton steps from the
left end of a bracket therefore never overshoot the root, and the slope
bounds turn every evaluation into a rigorous two-sided bracket.  Iteration
stops once the bracket is narrower than ``log(1 + tol)``; the upper end is
returned, so ``modular(f / norm) <= 1`` holds at the returned value.

The functions with a leading underscore are batched kernels shared with the
Besov and sequence-space engines: leading array axes index independent
problems (cubes, levels), the last axis indexes quadrature points.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from .exponents import VariableExponent
from .grid import DyadicCube, Grid, SampledField, cube_mask, level_blocks

__all__ = [
    "ModularReport",
    "modular",
    "luxemburg_norm",
    "mixed_norm",
    "mixed_norm_reference",
    "luxemburg_reference",
    "lp_tau_norm",
    "lp_tau_unit_ball",
    "lp_tilde_norm",
    "chi_norm",
    "chi_norms_at_level",
    "morrey_norm",
]

DEFAULT_TOL = 1e-10
_MAX_ITER = 200


@dataclass(frozen=True)
class ModularReport:
    """Value of the modular; ``finite`` is False when the value is the infinity flag."""

    value: float
    finite: bool

    def __float__(self):
        return self.value


def _log_abs(data) -> np.ndarray:
    with np.errstate(divide="ignore"):
        return np.log(np.abs(data))


def _lse(a: np.ndarray, axis=-1):
    """log-sum-exp that tolerates rows of -inf."""
    m = np.max(a, axis=axis, keepdims=True)
    m_safe = np.where(np.isfinite(m), m, 0.0)
    s = np.sum(np.exp(a - m_safe), axis=axis, keepdims=True)
    with np.errstate(divide="ignore"):
        out = np.log(s) + m_safe
    return np.squeeze(out, axis=axis)


def _prepare(logf, p, inf_mask, logw):
    """Split into the finite-exponent part and the infinity-flag part."""
    logf = np.asarray(logf, dtype=float)
    p = np.broadcast_to(np.asarray(p, dtype=float), logf.shape)
    if inf_mask is None:
        inf_mask = np.zeros(1, dtype=bool)
    inf_b = np.broadcast_to(np.asarray(inf_mask, dtype=bool), logf.shape)
    p_fin = np.where(inf_b, 1.0, p)
    with np.errstate(invalid="ignore"):
        c = np.where(inf_b | np.isneginf(logf), -np.inf, logw + p_fin * logf)
    active = np.isfinite(c)
    if inf_b.any():
        t_inf = np.max(np.where(inf_b, logf, -np.inf), axis=-1)
    else:
        t_inf = np.full(logf.shape[:-1], -np.inf)
    return c, p_fin, active, t_inf


def _log_luxemburg(logf, p, inf_mask=None, logw=0.0, tol=DEFAULT_TOL, with_state=False):
    """Batched ``log`` of the Luxemburg norm.

    Parameters
    ----------
    logf : ndarray
        ``log|f|`` (``-inf`` at zeros); last axis = quadrature points.
    p : array_like
        Exponent values, broadcastable to ``logf``.
    inf_mask : array_like of bool, optional
        Points carrying the infinity flag.
    logw : float or array_like
        Log quadrature weight.

    Returns
    -------
    t : ndarray
        Upper end of the final bracket for ``log(norm)``; ``-inf`` for zero rows.
    """
    c, p_fin, active, t_inf = _prepare(logf, p, inf_mask, logw)
    big = np.where(active, p_fin, -np.inf)
    small = np.where(active, p_fin, np.inf)
    pmax = np.max(big, axis=-1)
    pmin = np.min(small, axis=-1)
    f0 = _lse(c)
    live = np.isfinite(f0)
    shape = f0.shape
    t_fin = np.full(shape, -np.inf)
    if np.any(live):
        safe_min = np.where(live, pmin, 1.0)
        safe_max = np.where(live, pmax, 1.0)
        f0s = np.where(live, f0, 0.0)
        a, b = f0s / safe_max, f0s / safe_min
        lo = np.minimum(a, b)
        hi = np.maximum(a, b)
        width = math.log1p(tol)
        t = lo.copy()
        for _ in range(_MAX_ITER):
            todo = live & (hi - lo > width)
            if not np.any(todo):
                break
            expo = c - p_fin * t[..., None]
            F = _lse(expo)
            with np.errstate(invalid="ignore"):
                wts = np.exp(expo - F[..., None])
            slope = -np.sum(np.where(active, p_fin * wts, 0.0), axis=-1)
            b_fast = t + F / safe_max
            b_slow = t + F / safe_min
            lo = np.where(todo, np.maximum(lo, np.minimum(b_fast, b_slow)), lo)
            hi = np.where(todo, np.minimum(hi, np.maximum(b_fast, b_slow)), hi)
            step = t - F / np.where(slope < 0, slope, -safe_min)
            stalled = ~(step > t) & (F > 0)
            step = np.where((step < lo) | (step > hi) | stalled, 0.5 * (lo + hi), step)
            t = np.where(todo, step, t)
        # make the unit-ball property hold at the returned point
        for _ in range(8):
            F = _lse(c - p_fin * hi[..., None])
            bad = live & (F > 0)
            if not np.any(bad):
                break
            hi = np.where(bad, hi + np.maximum(F / safe_min, 4 * np.finfo(float).eps * (1 + np.abs(hi))), hi)
        t_fin = np.where(live, hi, -np.inf)
    out = np.maximum(t_fin, t_inf)
    if not with_state:
        return out
    return out, (c, p_fin, active, t_fin, t_inf)


def _fields_array(fs, grid=None):
    if isinstance(fs, SampledField):
        fs = [fs]
    fs = list(fs)
    if not fs:
        return None, grid
    grid = fs[0].grid if grid is None else grid
    for f in fs:
        if f.grid != grid:
            raise ValueError("fields live on different grids")
    return np.stack([f.data for f in fs]), grid


def modular(p: VariableExponent, f: SampledField) -> ModularReport:
    """Quadrature of ``|f(x)|^{p(x)}``; infinite-flag points impose ``|f| <= 1``."""
    if p.grid != f.grid:
        raise ValueError("exponent and field live on different grids")
    absf = np.abs(f.data)
    fin = ~p.infinite
    if p.has_infinity and np.any(absf[p.infinite] > 1.0):
        return ModularReport(math.inf, False)
    value = float(np.sum(absf[fin] ** p.values[fin]) * f.grid.cell_volume)
    return ModularReport(value, math.isfinite(value))


def luxemburg_norm(p: VariableExponent, f: SampledField, tol: float = DEFAULT_TOL) -> float:
    """Luxemburg norm ``inf{lambda > 0 : modular(f / lambda) <= 1}``.

    Parameters
    ----------
    p : VariableExponent
        Exponent of class P0.
    f : SampledField
    tol : float
        Relative width of the final bracket; the upper end is returned.

    Examples
    --------
    >>> from varbesov.grid import Grid
    >>> g = Grid(1, 0, 8)
    >>> p = VariableExponent.constant(g, 2.0)
    >>> round(luxemburg_norm(p, g.field(np.ones(g.shape))), 12)
    1.0
    """
    if tol <= 0:
        raise ValueError("tol must be positive")
    if p.grid != f.grid:
        raise ValueError("exponent and field live on different grids")
    if not np.all(np.isfinite(f.data)):
        raise ValueError("field values must be finite")
    logf = _log_abs(f.data).ravel()
    t = _log_luxemburg(logf, p.values.ravel(), p.infinite.ravel(), math.log(f.grid.cell_volume), tol)
    return float(np.exp(t))


def _log_mixed(logf, p, p_inf, q, q_inf, logw, tol=DEFAULT_TOL):
    """Batched ``log`` of the l^{q}(L^{p}) norm.

    ``logf`` has shape ``(..., levels, points)``; ``p`` and ``q`` are
    broadcastable to ``(..., 1, points)``.  ``q_inf`` selects the constant
    ``q = inf`` flag; a constant finite ``q`` is passed as a Python float.
    """
    logf = np.asarray(logf, dtype=float)
    if q_inf:
        t = _log_luxemburg(logf, p, p_inf, logw, tol)
        return np.max(t, axis=-1)
    if np.isscalar(q):
        t = _log_luxemburg(logf, p, p_inf, logw, tol * 1e-2)
        return _lse(q * t) / q
    q = np.asarray(q, dtype=float)
    p_arr = np.asarray(p, dtype=float)
    r = p_arr / q
    q_full = np.broadcast_to(q, logf.shape)
    lead = logf.shape[:-2]
    q_row = np.broadcast_to(q, lead + (1, logf.shape[-1]))[..., 0, :]
    qmin = np.min(q_row, axis=-1)
    qmax = np.max(q_row, axis=-1)
    inner_tol = tol * 1e-2

    def evaluate(s):
        logg = q_full * (logf - s[..., None, None])
        t, (c, p_fin, active, t_fin, t_inf) = _log_luxemburg(
            logg, r, p_inf, logw, inner_tol, with_state=True
        )
        # slope of each level term: weighted harmonic-type mean of q
        expo = c - p_fin * np.where(np.isfinite(t_fin), t_fin, 0.0)[..., None]
        wts = np.exp(expo - np.max(np.where(active, expo, -np.inf), axis=-1, keepdims=True))
        wts = np.where(active, wts, 0.0)
        num = np.sum(wts * p_fin * q_full, axis=-1)
        den = np.sum(wts * p_fin, axis=-1)
        with np.errstate(invalid="ignore", divide="ignore"):
            dt = -num / den
        if p_inf is not None and np.any(p_inf):
            inf_b = np.broadcast_to(np.asarray(p_inf, dtype=bool), logg.shape)
            masked = np.where(inf_b, logg, -np.inf)
            arg = np.argmax(masked, axis=-1)
            q_at = np.take_along_axis(q_full, arg[..., None], axis=-1)[..., 0]
            dt = np.where(t_inf >= t_fin, -q_at, dt)
        dt = np.where(np.isfinite(t), dt, 0.0)
        G = _lse(t)
        with np.errstate(invalid="ignore"):
            share = np.exp(t - np.where(np.isfinite(G), G, 0.0)[..., None])
        dG = np.sum(np.where(np.isfinite(t), share * dt, 0.0), axis=-1)
        return G, dG

    zero = np.zeros(lead)
    G0, dG0 = evaluate(zero)
    live = np.isfinite(G0)
    out = np.full(lead, -np.inf)
    if not np.any(live):
        return out
    G0s = np.where(live, G0, 0.0)
    a, b = G0s / qmax, G0s / qmin
    lo, hi = np.minimum(a, b), np.maximum(a, b)
    width = math.log1p(tol)
    s = np.clip(-G0s / np.where(dG0 < 0, dG0, -qmin), lo, hi)
    for _ in range(_MAX_ITER):
        todo = live & (hi - lo > width)
        if not np.any(todo):
            break
        G, dG = evaluate(s)
        G = np.where(live, G, 0.0)
        b_fast = s + G / qmax
        b_slow = s + G / qmin
        lo = np.where(todo, np.maximum(lo, np.minimum(b_fast, b_slow)), lo)
        hi = np.where(todo, np.minimum(hi, np.maximum(b_fast, b_slow)), hi)
        step = s - G / np.where(dG < 0, dG, -qmin)
        step = np.where((step <= lo) | (step >= hi), 0.5 * (lo + hi), step)
        s = np.where(todo, step, s)
    for _ in range(8):
        G, _ = evaluate(hi)
        bad = live & (G > 0)
        if not np.any(bad):
            break
        hi = np.where(bad, hi + np.maximum(G / qmin, 4 * np.finfo(float).eps * (1 + np.abs(hi))), hi)
    return np.where(live, hi, -np.inf)


def _check_q(q: VariableExponent):
    if q.has_infinity and not q.is_infinite:
        raise ValueError("q = inf is only supported as a constant exponent")


def _q_argument(q: VariableExponent):
    """Translate q into the (array-or-scalar, inf-flag) pair used by the kernels."""
    _check_q(q)
    if q.is_infinite:
        return None, True
    if q.is_constant:
        return float(q.constant_value), False
    return q.values, False


def mixed_norm(p: VariableExponent, q: VariableExponent, fs, tol: float = DEFAULT_TOL) -> float:
    """Norm of the level sequence ``fs`` in ``l^{q(.)}(L^{p(.)})``.

    Uses the simplified modular ``sum_v || |f_v|^{q} ||_{p/q}`` (which is the
    inner infimum of the full definition written in closed form), solved by
    the batched bracketed Newton kernels.  For constant ``q`` the outer root
    is explicit, ``(sum_v ||f_v||_p^q)^{1/q}``; ``q = inf`` gives ``max_v ||f_v||_p``.

    See Also
    --------
    mixed_norm_reference : plain nested bisection of the full definition.
    """
    data, grid = _fields_array(fs)
    if data is None:
        return 0.0
    if p.grid != grid or q.grid != grid:
        raise ValueError("exponents and fields live on different grids")
    qv, q_inf = _q_argument(q)
    logf = _log_abs(data).reshape(len(data), -1)
    pv = p.values.reshape(1, -1)
    pinf = p.infinite.reshape(1, -1) if p.has_infinity else None
    if not q_inf and not np.isscalar(qv):
        qv = qv.reshape(1, -1)
    t = _log_mixed(logf, pv, pinf, qv, q_inf, math.log(grid.cell_volume), tol)
    return float(np.exp(t))


def _bisect_decreasing(fun, target=1.0, tol=DEFAULT_TOL):
    """Smallest ``lam`` with ``fun(lam) <= target`` for decreasing ``fun`` (plain bisection)."""
    lo, hi = 1.0, 1.0
    while fun(hi) > target:
        hi *= 2.0
    while fun(lo) <= target and lo > 1e-300:
        lo /= 2.0
    while hi - lo > tol * hi:
        mid = 0.5 * (lo + hi)
        if fun(mid) <= target:
            hi = mid
        else:
            lo = mid
    return hi


def mixed_norm_reference(p: VariableExponent, q: VariableExponent, fs, tol: float = 1e-11) -> float:
    """Independent evaluator of the full mixed-norm definition.

    Outer bisection on ``mu`` of ``sum_v lambda_v(mu)`` where each
    ``lambda_v(mu) = inf{lam : modular_p(f_v / (mu * lam^{1/q})) <= 1}`` is
    found by its own bisection on the raw modular.  Slow; meant as an oracle.
    """
    data, grid = _fields_array(fs)
    if data is None:
        return 0.0
    _check_q(q)
    w = grid.cell_volume
    fin = ~p.infinite
    absv = [np.abs(d) for d in data]

    if q.is_infinite:
        return max(luxemburg_reference(p, grid.field(a), tol) for a in absv)
    qvals = q.values

    def level_term(a, mu):
        if not np.any(a):
            return 0.0

        def rho(lam):
            scaled = a / (mu * lam ** (1.0 / qvals))
            if np.any(scaled[~fin] > 1.0):
                return math.inf
            return float(np.sum(scaled[fin] ** p.values[fin]) * w)

        return _bisect_decreasing(rho, 1.0, tol)

    if not any(np.any(a) for a in absv):
        return 0.0
    return _bisect_decreasing(lambda mu: sum(level_term(a, mu) for a in absv), 1.0, tol)


def luxemburg_reference(p: VariableExponent, f: SampledField, tol: float = 1e-11) -> float:
    """Plain bisection on the raw modular (oracle for :func:`luxemburg_norm`)."""
    if not np.any(f.data):
        return 0.0
    return _bisect_decreasing(lambda lam: modular(p, f / lam).value, 1.0, tol)


def chi_norms_at_level(p: VariableExponent, v: int) -> np.ndarray:
    """``||chi_P||_{p(.)}`` for every cube ``P`` of level ``v`` (cube order of ``cubes_at_level``)."""
    grid = p.grid
    vol = 2.0 ** (-v * grid.dim)
    n_cubes = (2 ** (grid.box_exponent + v)) ** grid.dim
    if p.is_constant:
        pc = p.constant_value
        return np.full(n_cubes, 1.0 if pc == math.inf else vol ** (1.0 / pc))
    pv = level_blocks(p.values, grid, v)
    pinf = level_blocks(p.infinite, grid, v) if p.has_infinity else None
    logf = np.zeros(pv.shape)
    return np.exp(_log_luxemburg(logf, pv, pinf, math.log(grid.cell_volume)))


def chi_norm(p: VariableExponent, P: DyadicCube) -> float:
    """Luxemburg norm of the indicator of ``P``; ``|P|^{1/p}`` for constant ``p``."""
    if p.is_constant:
        pc = p.constant_value
        return 1.0 if pc == math.inf else P.volume ** (1.0 / pc)
    mask = cube_mask(p.grid, P)
    return luxemburg_norm(p, p.grid.field(mask.astype(float)))


def _large_cube_levels(grid: Grid, unit_only: bool):
    if unit_only:
        return [0]
    return list(range(-grid.box_exponent, 1))


def _cube_norm_sup(p, f, levels, normalizer):
    grid = f.grid
    lw = math.log(grid.cell_volume)
    logf_all = _log_abs(f.data)
    best = 0.0
    for v in levels:
        logf = level_blocks(logf_all, grid, v)
        pv = level_blocks(np.broadcast_to(p.values, grid.shape), grid, v)
        pinf = level_blocks(p.infinite, grid, v) if p.has_infinity else None
        norms = np.exp(_log_luxemburg(logf, pv, pinf, lw))
        best = max(best, float(np.max(norms / normalizer(v))))
    return best


def lp_tau_norm(p: VariableExponent, tau: VariableExponent, f: SampledField) -> float:
    """``sup_{|P| >= 1} || f chi_P / ||chi_P||_{tau} ||_{p}`` over the box's dyadic cubes."""
    if f.grid.box_exponent < 0:
        raise ValueError("box smaller than one unit cube")
    levels = _large_cube_levels(f.grid, unit_only=False)
    return _cube_norm_sup(p, f, levels, lambda v: chi_norms_at_level(tau, v))


def lp_tau_unit_ball(p: VariableExponent, tau: VariableExponent, f: SampledField) -> bool:
    """Modular criterion: ``sup_P modular_p(f chi_P / ||chi_P||_tau) <= 1``."""
    grid = f.grid
    for v in _large_cube_levels(grid, unit_only=False):
        chi = chi_norms_at_level(tau, v)
        blocks = level_blocks(np.abs(f.data), grid, v) / chi[:, None]
        pv = level_blocks(np.broadcast_to(p.values, grid.shape), grid, v)
        pinf = level_blocks(p.infinite, grid, v)
        if np.any(blocks[pinf] > 1.0):
            return False
        vals = np.sum(np.where(pinf, 0.0, blocks ** np.where(pinf, 1.0, pv)), axis=-1)
        if np.max(vals) * grid.cell_volume > 1.0:
            return False
    return True


def lp_tilde_norm(p: VariableExponent, f: SampledField) -> float:
    """``sup_{|P| = 1} || f chi_P ||_{p}`` over the unit cells of the box."""
    return _cube_norm_sup(p, f, [0], lambda v: 1.0)


def morrey_norm(u: float, p: float, f: SampledField) -> float:
    """Morrey norm ``sup_B |B|^{1/p - 1/u} (int_B |f|^u)^{1/u}`` over dyadic cubes.

    Parameters
    ----------
    u, p : float
        ``0 < u <= p < inf``.
    """
    if not 0 < u <= p < math.inf:
        raise ValueError("Morrey norm needs 0 < u <= p < inf")
    grid = f.grid
    powered = np.abs(f.data) ** u
    best = 0.0
    for v in range(-grid.box_exponent, grid.resolution_exponent + 1):
        sums = np.sum(level_blocks(powered, grid, v), axis=-1) * grid.cell_volume
        vol = 2.0 ** (-v * grid.dim)
        best = max(best, float(vol ** (1.0 / p - 1.0 / u) * np.max(sums) ** (1.0 / u)))
    return best
