"""Decay kernels, periodic convolution, the maximal function and the discrete lemmas.

``eta_{v,m}(x) = 2**(n v) (1 + 2**v |x|)**-m`` is the standard majorant; on
the torus ``|x|`` is the periodic distance, i.e. the kernel is the
minimum-image restriction rather than the full periodization.  Every check
below reports measured brackets instead of asserting unknown constants.
"""

from __future__ import annotations

import math
from collections import defaultdict
from dataclasses import dataclass, field

import numpy as np

from .cubenorms import cube_sup_norm
from .exponents import VariableExponent, estimate_clog
from .grid import DyadicCube, Grid, SampledField, cube_mask

__all__ = [
    "eta",
    "eta_field",
    "convolve",
    "maximal_radii",
    "maximal_function",
    "maximal_majorant_constant",
    "weighted_level_sum",
    "hardy_constant",
    "hardy_cascade",
    "HardyResult",
    "LemmaCheck",
    "verify_eta_lemmas",
    "verify_r_trick",
    "verify_hardy",
    "level_mixing_constant",
    "verify_level_mixing",
]


def eta(v: int, m_exp: float, x, dim: int = 1):
    """``2**(dim v) (1 + 2**v |x|)**-m_exp``; ``x`` is a distance (scalar or array)."""
    if m_exp <= 0:
        raise ValueError("decay exponent must be positive")
    x = np.abs(np.asarray(x, dtype=float))
    out = 2.0 ** (dim * v) * (1.0 + 2.0**v * x) ** (-m_exp)
    return float(out) if out.ndim == 0 else out


def eta_field(grid: Grid, v: int, m_exp: float, center=0.0) -> SampledField:
    """``eta_{v,m}(x - center)`` sampled with the periodic distance."""
    return grid.field(eta(v, m_exp, grid.periodic_distance(center), grid.dim))


def convolve(f: SampledField, g: SampledField) -> SampledField:
    """Periodic convolution ``int f(x - y) g(y) dy`` by FFT with weight ``h**n``."""
    if f.grid != g.grid:
        raise ValueError("fields live on different grids")
    out = np.fft.ifftn(np.fft.fftn(f.data) * np.fft.fftn(g.data)) * f.grid.cell_volume
    if not (f.is_complex or g.is_complex):
        out = out.real
    return f.grid.field(out)


def _convolve_arrays(a, b_hat, w):
    return np.fft.ifftn(np.fft.fftn(a) * b_hat).real * w


def maximal_radii(grid: Grid) -> list:
    """``0``, the dyadic radii ``h, 2h, 4h, ...`` and finally the torus radius."""
    r_max = math.sqrt(grid.dim) * grid.box_length / 2
    radii = [0.0]
    r = grid.spacing
    while r < r_max:
        radii.append(r)
        r *= 2
    radii.append(r_max)
    return radii


def _ball_counts(grid: Grid, radii):
    dist = grid.periodic_distance(0.0)
    return [int(np.count_nonzero(dist <= r + 1e-12 * grid.spacing)) for r in radii]


def maximal_function(f: SampledField) -> SampledField:
    """Centered maximal function over discrete Euclidean balls of the radius family.

    The family is :func:`maximal_radii`; radius 0 is the point itself, so the
    result dominates ``|f|`` exactly.
    """
    grid = f.grid
    absf = np.abs(f.data)
    spec = np.fft.fftn(absf)
    dist = grid.periodic_distance(0.0)
    out = absf.copy()
    for r in maximal_radii(grid)[1:]:
        ball = (dist <= r + 1e-12 * grid.spacing).astype(float)
        avg = np.fft.ifftn(spec * np.fft.fftn(ball / ball.sum())).real
        np.maximum(out, avg, out=out)
    return grid.field(out)


def maximal_majorant_constant(grid: Grid, kernel: SampledField) -> float:
    """Constant ``c`` with ``|f| * k <= c M f`` for a radially decreasing kernel ``k``.

    Layer-cake: ``|f| * k`` is an average over balls weighted by ``||k||_1``,
    and a ball of any radius is covered by the next radius of the family at
    the cost of the discrete count ratio.
    """
    counts = _ball_counts(grid, maximal_radii(grid))
    ratio = max(b / a for a, b in zip(counts, counts[1:]))
    return float(np.sum(kernel.data) * grid.cell_volume * ratio)


def weighted_level_sum(fs, delta: float) -> list:
    """``g_v = sum_k 2**(-|k - v| delta) f_k`` over the available levels ``k``."""
    fs = list(fs)
    if not fs:
        raise ValueError("empty level list")
    if delta <= 0:
        raise ValueError("delta must be positive")
    grid = fs[0].grid
    k = np.arange(len(fs))
    weights = 2.0 ** (-np.abs(k[:, None] - k[None, :]) * delta)
    data = np.stack([f.data for f in fs])
    mixed = np.tensordot(weights, data, axes=(1, 0))
    return [grid.field(row) for row in mixed]


def hardy_constant(a: float, q: float) -> float:
    """``1/(1-a)`` for ``q >= 1``, ``(1 - a**q)**(-1/q)`` for ``q < 1``."""
    if not 0 < a < 1:
        raise ValueError("a must lie in (0, 1)")
    if q == math.inf or q >= 1:
        return 1.0 / (1.0 - a)
    return (1.0 / (1.0 - a**q)) ** (1.0 / q)


@dataclass(frozen=True)
class HardyResult:
    deltas: np.ndarray
    bound_ok: bool
    lhs: float
    rhs: float
    constant: float


def _lq(x, q, axis=-1):
    if q == math.inf:
        return np.max(x, axis=axis)
    return np.sum(x**q, axis=axis) ** (1.0 / q)


def hardy_cascade(eps, a: float, J: int, q: float) -> HardyResult:
    """Cascade ``delta_k = sum_{j=J+}^{k} a**(k-j) eps_j`` and its l^q bound.

    ``eps`` is indexed from 0; entries below ``J+ = max(J, 0)`` are outside the
    lemma and are ignored.  ``deltas`` has the same length, zero below ``J+``.
    """
    if q <= 0:
        raise ValueError("q must be positive")
    c = hardy_constant(a, q)
    eps = np.asarray(eps, dtype=float)
    if np.any(eps < 0):
        raise ValueError("eps must be non-negative")
    start = max(J, 0)
    deltas = np.zeros_like(eps)
    acc = 0.0
    for k in range(start, eps.shape[-1]):
        acc = a * acc + eps[k]
        deltas[k] = acc
    lhs = float(_lq(deltas[start:], q))
    rhs = float(_lq(eps[start:], q)) if eps.size > start else 0.0
    return HardyResult(deltas, lhs <= c * rhs * (1 + 1e-12), lhs, rhs, c)


def verify_hardy(rng, trials: int = 10_000, qs=(0.5, 1.0, 2.0), length: int = 24) -> dict:
    """Randomized search for violations of the cascade bound; vectorized over trials."""
    out = {}
    for q in qs:
        a = rng.uniform(0.05, 0.95, size=trials)
        J = rng.integers(-3, length // 2, size=trials)
        eps = rng.exponential(size=(trials, length)) * (rng.random((trials, length)) < 0.6)
        start = np.maximum(J, 0)
        k = np.arange(length)
        eps = np.where(k[None, :] >= start[:, None], eps, 0.0)
        deltas = np.zeros_like(eps)
        acc = np.zeros(trials)
        for j in range(length):
            acc = a * acc + eps[:, j]
            deltas[:, j] = acc
        c = np.array([hardy_constant(ai, q) for ai in a])
        lhs, rhs = _lq(deltas, q), _lq(eps, q)
        ratio = np.where(rhs > 0, lhs / np.where(rhs > 0, rhs * c, 1.0), 0.0)
        out[q] = {"max_ratio_to_constant": float(ratio.max()), "violations": int(np.sum(ratio > 1 + 1e-12))}
    return out


@dataclass
class LemmaCheck:
    """Ratio brackets for one lemma, keyed by level pair and grouped by offset."""

    name: str
    one_sided: bool = False
    pairs: dict = field(default_factory=dict)

    def add(self, key, group, lo, hi):
        self.pairs[key] = (group, float(lo), float(hi))

    @property
    def bracket(self) -> tuple:
        los = [lo for _, lo, _ in self.pairs.values()]
        his = [hi for _, _, hi in self.pairs.values()]
        return (min(los), max(his)) if los else (math.nan, math.nan)

    def group_spreads(self) -> dict:
        """Per offset group: max/min of the bracket ends across the pairs in it."""
        groups = defaultdict(list)
        for g, lo, hi in self.pairs.values():
            groups[g].append((lo, hi))
        spreads = {}
        for g, items in groups.items():
            his = [hi for _, hi in items]
            spread = max(his) / min(his)
            if not self.one_sided:
                los = [lo for lo, _ in items]
                spread = max(spread, max(los) / min(los))
            spreads[g] = spread
        return spreads

    @property
    def passed(self) -> bool:
        lo, hi = self.bracket
        if not (np.isfinite(hi) and hi > 0):
            return False
        if not self.one_sided and not lo > 0:
            return False
        return all(s <= 2.0 for s in self.group_spreads().values())


def _eta_hat(grid, v, m_exp):
    return np.fft.fftn(eta(v, m_exp, grid.periodic_distance(0.0), grid.dim))


def verify_eta_lemmas(grid: Grid, levels, m_exp: float, r: float, alpha: VariableExponent | None = None,
                      R: float | None = None) -> dict:
    """Ratio brackets for the four eta-kernel estimates on ``grid``.

    * two convolutions reduce to one: ``eta_{v0} * eta_{v1} / eta_{min(v0,v1)}``;
    * averaging over a cube ``Q`` of side ``2**-v``: ``eta_v * (chi_Q/|Q|)(x) / eta_v(x - y)``, ``y in Q``;
    * the ``r``-power rule for ``eta_j * eta_v * chi_Q``;
    * moving ``2**(v alpha)`` across the kernel at the cost of ``R`` extra decay.

    Parameters
    ----------
    levels : sequence of int
        Levels ``>= 0`` with ``2**-v >= 4h``.
    m_exp : float
        Decay; must exceed ``n`` and ``n / r``.
    r : float
        In ``(0, 1]``.
    alpha : VariableExponent, optional
        Smoothness for the last check (default: a periodic sine profile).
    R : float, optional
        Extra decay; default ``ceil(c_log(alpha)) + 1``.
    """
    n = grid.dim
    levels = sorted(set(int(v) for v in levels))
    if m_exp <= n or not 0 < r <= 1 or m_exp <= n / r:
        raise ValueError("need m_exp > n, m_exp > n/r and 0 < r <= 1")
    if levels[0] < 0 or 2.0 ** -levels[-1] < 4 * grid.spacing:
        raise ValueError("levels must satisfy 0 <= v and 2^-v >= 4h")
    w = grid.cell_volume
    dist = grid.periodic_distance(0.0)
    report = {}

    two = LemmaCheck("convolution of two kernels")
    for i, v0 in enumerate(levels):
        for v1 in levels[i:]:
            lhs = _convolve_arrays(eta(v0, m_exp, dist, n), _eta_hat(grid, v1, m_exp), w)
            ratio = lhs / eta(v0, m_exp, dist, n)
            two.add((v0, v1), v1 - v0, ratio.min(), ratio.max())
    report["two_kernels"] = two

    avg = LemmaCheck("cube average")
    for v in levels:
        Q = DyadicCube(v, (0,) * n, grid.box_exponent)
        chi = cube_mask(grid, Q).astype(float) / Q.volume
        lhs = _convolve_arrays(chi, _eta_hat(grid, v, m_exp), w)
        pts = np.argwhere(chi > 0)
        if len(pts) > 1024:
            pts = pts[np.linspace(0, len(pts) - 1, 1024).astype(int)]
        nearest = np.zeros(grid.shape)
        farthest = np.full(grid.shape, np.inf)
        for y in pts:
            val = eta(v, m_exp, grid.periodic_distance(y * grid.spacing), n)
            np.maximum(nearest, val, out=nearest)
            np.minimum(farthest, val, out=farthest)
        avg.add(v, 0, np.min(lhs / nearest), np.max(lhs / farthest))
    report["cube_average"] = avg

    power = LemmaCheck("r-power rule")
    for v in levels:
        Q = DyadicCube(v, (0,) * n, grid.box_exponent)
        chi = cube_mask(grid, Q).astype(float)
        inner_m = _convolve_arrays(chi, _eta_hat(grid, v, m_exp), w)
        inner_mr = _convolve_arrays(chi, _eta_hat(grid, v, m_exp * r), w)
        for j in levels:
            lhs = _convolve_arrays(inner_m, _eta_hat(grid, j, m_exp), w) ** r
            rhs = 2.0 ** (max(v - j, 0) * n * (1 - r)) * _convolve_arrays(inner_mr, _eta_hat(grid, j, m_exp * r), w)
            ratio = lhs / rhs
            power.add((j, v), v - j, ratio.min(), ratio.max())
    report["r_power"] = power

    if alpha is None:
        x = grid.coordinates()
        vals = 0.5 + 0.25 * np.sin(2 * np.pi * x[0] / grid.box_length)
        alpha = VariableExponent(grid, vals, expression="0.5 + 0.25*sin(2*pi*x/L)", exponent_class="real")
    if R is None:
        R = math.ceil(estimate_clog(alpha)) + 1.0
    smooth = LemmaCheck("variable smoothness shift", one_sided=True)
    offsets = _shift_offsets(grid)
    a_vals = alpha.values
    for v in levels:
        worst = 0.0
        for off in offsets:
            d = grid.periodic_distance(np.asarray(off) * grid.spacing)[(0,) * n]
            diff = a_vals - np.roll(a_vals, off, axis=tuple(range(n)))
            ratio = 2.0 ** (v * diff) * (1.0 + 2.0**v * d) ** (-R)
            worst = max(worst, float(ratio.max()))
        smooth.add(v, 0, 0.0, worst)
    report["smoothness_shift"] = smooth
    report["R"] = R
    return report


def _shift_offsets(grid: Grid):
    side = grid.side_points
    if grid.dim == 1:
        return [(k,) for k in range(side)]
    ks = sorted(set(np.unique(np.geomspace(1, side - 1, 48).astype(int)).tolist() + list(range(8))))
    out = []
    for k in ks:
        out += [(k, 0), (0, k), (k, k), (k, -k)]
    return out


def _radial_symbol(grid, profile, scale):
    return profile(grid.frequency_magnitude() / scale)


def _peetre(values: np.ndarray, grid: Grid, N: float, m_exp: float) -> np.ndarray:
    """``sup_y |values(y)| / (1 + N|x - y|)**m`` by brute force over all offsets (1-D)."""
    out = np.zeros(grid.shape)
    side = grid.side_points
    h = grid.spacing
    for k in range(side):
        d = min(k, side - k) * h
        np.maximum(out, np.roll(values, k) / (1.0 + N * d) ** m_exp, out=out)
    return out


def verify_r_trick(g: SampledField, R_values, N: float, r: float, m_exp: float,
                   theta_profile=None, omega_profile=None) -> dict:
    """Measured constants of the ``r``-trick for ``theta_R * omega_N * g``.

    The filters are radial frequency profiles: ``F theta_R(xi) = theta(|xi|/R)``
    and ``F omega_N(xi) = omega(|xi|/N)`` with ``omega`` vanishing beyond 1.

    Returns the max of ``LHS / RHS`` per ``R`` (the ``max(1, (N/R)**m)`` factor
    included) and, for ``r < 1`` in 1-D, the max over the grid of
    ``(g*)**r / (eta_{N,m} * |omega_N * g|**r)`` for the Peetre function ``g*``.
    """
    grid = g.grid
    if m_exp <= grid.dim or r <= 0:
        raise ValueError("need m_exp > n and r > 0")
    if theta_profile is None:
        theta_profile = lambda rho: np.exp(-(rho**2))  # noqa: E731
    if omega_profile is None:
        from .filterbank import FilterBank

        bank = FilterBank(grid)
        omega_profile = lambda rho: bank.profile(2.0 * rho)  # noqa: E731
    probe = np.linspace(1.0, 4.0, 64)
    if np.max(np.abs(omega_profile(probe))) > 0:
        raise ValueError("omega is not band-limited to the unit ball")
    w = grid.cell_volume
    spec = np.fft.fftn(g.data)
    low = np.fft.ifftn(spec * _radial_symbol(grid, omega_profile, N))
    low = np.abs(low)
    ker = eta(0, m_exp, N * grid.periodic_distance(0.0), grid.dim) * N**grid.dim
    avg = _convolve_arrays(low**r, np.fft.fftn(ker), w) ** (1.0 / r)
    out = {"ratios": {}, "peetre": None}
    for R in R_values:
        lhs = np.abs(np.fft.ifftn(spec * _radial_symbol(grid, omega_profile, N) * _radial_symbol(grid, theta_profile, R)))
        rhs = max(1.0, (N / R) ** m_exp) * avg
        with np.errstate(invalid="ignore", divide="ignore"):
            ratio = np.where(rhs > 0, lhs / rhs, 0.0)
        out["ratios"][float(R)] = float(ratio.max())
    if r < 1 and grid.dim == 1:
        star = _peetre(low, grid, N, m_exp)
        base = _convolve_arrays(low**r, np.fft.fftn(ker), w)
        with np.errstate(invalid="ignore", divide="ignore"):
            pr = np.where(base > 0, star**r / base, 0.0)
        out["peetre"] = float(pr.max())
    return out


def level_mixing_constant(delta: float, beta: float, q: float) -> float:
    """Explicit constant for the level-mixing bound with constant ``p, q >= 1``.

    Levels ``k`` inside the window contribute through Minkowski with the
    two-sided geometric weight; levels below the window are controlled by the
    ancestor cube at level ``k``, costing ``2**(i beta)`` for ``i`` levels up
    (``beta = n/tau`` or ``n/p``).
    """
    if delta <= beta:
        raise ValueError("need delta > beta")
    a = 2.0**-delta
    inside = (1 + a) / (1 - a)
    b = 2.0 ** -(delta - beta)
    below = (1 - 2.0 ** (-delta * q)) ** (-1.0 / q) * b / (1 - b)
    return inside + below


def verify_level_mixing(level_sets, delta: float, p: VariableExponent, q: VariableExponent,
                        tau: VariableExponent | None = None, tilde: bool = False) -> dict:
    """Ratios ``||(g_v)|| / ||(f_v)||`` for the two cube-sup sequence norms.

    ``level_sets`` is a list of level lists ``[f_0, ..., f_K]`` of
    non-negative fields.  With ``tilde=False`` the norm is the ``tau``
    version (all cubes, windows ``v >= v_P+``); otherwise the ``|P|^{1/p}``
    version over cubes with ``|P| <= 1``.
    """
    ratios = []
    for fs in level_sets:
        gs = weighted_level_sum(fs, delta)
        fa = np.stack([np.abs(f.data) for f in fs])
        ga = np.stack([np.abs(x.data) for x in gs])
        idx = range(len(fs))
        if tilde:
            kw = dict(normalization="p", window="sharp")
        else:
            kw = dict(normalization="tau", tau=tau)
        fn = cube_sup_norm(fa, idx, p, q, **kw).value
        gn = cube_sup_norm(ga, idx, p, q, **kw).value
        if fn > 0:
            ratios.append(gn / fn)
    n = p.grid.dim
    beta = n / (p.lower_bound if tilde else tau.lower_bound)
    exact = p.is_constant and q.is_constant and p.lower_bound >= 1 and q.lower_bound >= 1
    if not tilde:
        exact = exact and tau.is_constant
    constant = level_mixing_constant(delta, beta, max(q.lower_bound, 1.0))
    return {
        "ratios": ratios,
        "max_ratio": max(ratios) if ratios else 0.0,
        "constant": constant,
        "explicit": exact,
        "passed": bool(ratios) and max(ratios) <= constant * (1 + 1e-9),
    }
