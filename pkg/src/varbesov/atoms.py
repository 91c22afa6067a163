"""Smooth atoms with support, derivative and moment conditions; atomic synthesis.

An ``[K, L]``-atom at ``Q_{v,m}`` is supported in the concentric cube
``gamma Q_{v,m}``, obeys ``|d^beta a| <= 2**(v(|beta| + 1/2))`` for
``|beta| <= K`` and, when ``v >= 1``, has vanishing moments up to order ``L``.
Derivatives are taken spectrally (of the trigonometric interpolant of the
samples) and moments in minimum-image coordinates around the atom center.
"""

from __future__ import annotations

import itertools
import math
from dataclasses import dataclass, field

import numpy as np

from .besov import BesovParams, besov_tilde_norm, besov_type_norm
from .exponents import VariableExponent
from .filterbank import FilterBank
from .grid import DyadicCube, Grid, SampledField, scale_cube
from .sequences import CoefficientSequence, inverse_phi_transform, phi_transform, seq_b_norm, seq_b_tilde_norm

__all__ = [
    "Atom",
    "AtomReport",
    "multi_indices",
    "spectral_derivative",
    "scaled_moments",
    "validate_atom",
    "required_K_L",
    "make_bump_atoms",
    "bump_family",
    "verify_fj_decay",
    "atomic_synthesis",
    "quasi_atomic_decomposition",
]

MOMENT_TOL_FACTOR = 1e-12
DERIVATIVE_MARGIN = 0.95


@dataclass(frozen=True, eq=False)
class Atom:
    """Samples of a candidate atom for the cube ``Q_{v,m}``."""

    v: int
    m: tuple
    K: int
    L: int
    gamma: float
    samples: SampledField

    def __post_init__(self):
        if self.K < 0 or self.L < -1:
            raise ValueError("need K >= 0 and L >= -1")
        if self.gamma <= 1:
            raise ValueError("support dilation gamma must exceed 1")
        object.__setattr__(self, "m", tuple(int(i) for i in np.atleast_1d(self.m)))

    @property
    def grid(self) -> Grid:
        return self.samples.grid

    @property
    def cube(self) -> DyadicCube:
        return DyadicCube(self.v, self.m, self.grid.box_exponent)


@dataclass
class AtomReport:
    support_ok: bool
    derivative_ok: bool
    moment_ok: bool
    support_leak: float
    derivative_margin: float
    moment_max: float
    moment_tol: float
    details: dict = field(default_factory=dict)

    @property
    def passed(self) -> bool:
        return self.support_ok and self.derivative_ok and self.moment_ok


def multi_indices(dim: int, order: int):
    """All multi-indices ``beta`` with ``|beta| <= order``, by increasing ``|beta|``."""
    out = [b for b in itertools.product(range(order + 1), repeat=dim) if sum(b) <= order]
    return sorted(out, key=lambda b: (sum(b), b))


def spectral_derivative(f: SampledField, beta) -> np.ndarray:
    """``d^beta f`` of the trigonometric interpolant, sampled on the grid."""
    grid = f.grid
    symbol = np.ones(grid.shape, dtype=complex)
    for k, b in zip(grid.angular_frequencies(), beta):
        if b:
            symbol = symbol * (1j * k) ** b
    out = np.fft.ifftn(np.fft.fftn(f.data) * symbol)
    return out if np.iscomplexobj(f.data) else out.real


def _scaled_coordinates(grid: Grid, Q: DyadicCube):
    return tuple(2.0**Q.v * d for d in grid.periodic_offsets(Q.center))


def scaled_moments(a: Atom, order: int) -> dict:
    """``int y^beta a(x) dx`` with ``y = 2**v (x - center)`` (minimum image), ``|beta| <= order``."""
    ys = _scaled_coordinates(a.grid, a.cube)
    w = a.grid.cell_volume
    out = {}
    for beta in multi_indices(a.grid.dim, order):
        mono = np.ones(a.grid.shape)
        for y, b in zip(ys, beta):
            mono = mono * y**b
        out[beta] = complex(np.sum(mono * a.samples.data) * w)
    return out


def validate_atom(a: Atom, moment_tol: float | None = None) -> AtomReport:
    """Check the support, derivative and moment conditions and report margins.

    ``moment_tol`` defaults to ``1e-12 * sup|a| * |gamma Q|``.  The derivative
    margin is ``1 - max_beta sup|d^beta a| / 2**(v(|beta|+1/2))`` (negative on
    failure).
    """
    grid = a.grid
    data = a.samples.data
    sup = float(np.max(np.abs(data)))
    region = scale_cube(a.cube, a.gamma, grid)
    inside = region.mask(grid)
    leak = float(np.max(np.abs(data[~inside]))) if np.any(~inside) else 0.0

    worst = 0.0
    per_beta = {}
    if sup > 0:
        for beta in multi_indices(grid.dim, a.K):
            bound = 2.0 ** (a.v * (sum(beta) + 0.5))
            ratio = float(np.max(np.abs(spectral_derivative(a.samples, beta)))) / bound
            per_beta[beta] = ratio
            worst = max(worst, ratio)

    vol = min(region.side, grid.box_length) ** grid.dim
    tol = MOMENT_TOL_FACTOR * sup * vol if moment_tol is None else moment_tol
    mmax = 0.0
    if a.v >= 1 and a.L >= 0 and sup > 0:
        mmax = max(abs(m) for m in scaled_moments(a, a.L).values())
    return AtomReport(
        support_ok=leak == 0.0,
        derivative_ok=worst <= 1.0,
        moment_ok=mmax <= tol,
        support_leak=leak,
        derivative_margin=1.0 - worst,
        moment_max=mmax,
        moment_tol=tol,
        details={"derivative_ratios": per_beta},
    )


def _floor(x: float) -> int:
    # guard against 1.9999999999999998 standing for 2
    return math.floor(x + 1e-12)


def required_K_L(alpha: VariableExponent, p: VariableExponent, tau: VariableExponent | None,
                 space: str = "B", n: int | None = None) -> tuple:
    """Smallest admissible ``(K, L)`` for atomic synthesis in ``B`` or ``B-tilde``.

    ``K = max([alpha+ + n/tau-] + 1, 0)`` (``p-`` in place of ``tau-`` for the
    tilde space) and ``L = max(-1, [n (1/min(1, p-) - 1) - alpha-])``, with
    ``[x]`` the integer part.
    """
    n = alpha.grid.dim if n is None else n
    if space == "B":
        if tau is None:
            raise ValueError("the B space needs tau")
        k_arg = alpha.upper_bound + n / tau.lower_bound
    elif space == "tilde":
        k_arg = alpha.upper_bound + n / p.lower_bound
    else:
        raise ValueError(f"unknown space {space!r}")
    K = max(_floor(k_arg) + 1, 0)
    L = max(-1, _floor(n * (1.0 / min(1.0, p.lower_bound) - 1.0) - alpha.lower_bound))
    return K, L


def _bump_1d(t):
    out = np.zeros_like(t)
    live = np.abs(t) < 1
    out[live] = np.exp(-1.0 / (1.0 - t[live] ** 2))
    return out


def make_bump_atoms(grid: Grid, v: int, m, K: int, L: int, gamma: float = 3.0, rng=None) -> Atom:
    """Build an ``[K, L]``-atom at ``Q_{v,m}`` from a tensor ``exp(-1/(1-t^2))`` bump.

    The bump on ``gamma Q`` is multiplied by a smooth modulation (random
    phases when ``rng`` is given), the weighted least-squares polynomial fit
    of degree ``<= L`` is removed so that the discrete moments vanish, and
    the result is scaled to 95% of the tightest derivative bound.
    """
    if 2.0 ** (-v) < 8 * grid.spacing:
        raise ValueError(f"level {v} too fine: need 2**-v >= 8h with h = {grid.spacing}")
    if gamma <= 1:
        raise ValueError("gamma must exceed 1")
    Q = DyadicCube(v, tuple(np.atleast_1d(m)), grid.box_exponent)
    ys = _scaled_coordinates(grid, Q)
    half = gamma / 2
    weight = np.ones(grid.shape)
    for y in ys:
        weight = weight * _bump_1d(y / half)

    needs_moments = v >= 1 and L >= 0
    if needs_moments:
        phases = rng.uniform(0, 2 * np.pi, size=grid.dim) if rng is not None else np.full(grid.dim, 0.3)
        shape = np.ones(grid.shape)
        for y, ph in zip(ys, phases):
            shape = shape * np.cos(2.0 * y / half + ph)
        betas = multi_indices(grid.dim, L)
        live = weight > 0
        monos = np.stack([np.prod([y[live] ** b for y, b in zip(ys, beta)], axis=0) for beta in betas])
        wl = weight[live]
        gram = (monos * wl) @ monos.T
        rhs = (monos * wl) @ shape[live]
        coef = np.linalg.solve(gram, rhs)
        resid = np.zeros(grid.shape)
        resid[live] = shape[live] - coef @ monos
        raw = weight * resid
        # one refinement pass pushes the discrete moments to round-off
        rhs2 = monos @ raw[live]
        corr = np.linalg.solve(gram, rhs2)
        raw[live] -= wl * (corr @ monos)
    else:
        raw = weight

    probe = grid.field(raw)
    worst = 0.0
    for beta in multi_indices(grid.dim, K):
        bound = 2.0 ** (v * (sum(beta) + 0.5))
        worst = max(worst, float(np.max(np.abs(spectral_derivative(probe, beta)))) / bound)
    if worst == 0:
        raise ValueError("degenerate atom (all samples zero)")
    atom = Atom(v, Q.m, K, L, gamma, grid.field(DERIVATIVE_MARGIN * raw / worst))
    report = validate_atom(atom)
    if not report.passed:
        raise ValueError(f"constructed atom failed validation: {report}")
    return atom


def bump_family(K: int, L: int, gamma: float = 3.0, rng=None):
    """Atom factory ``(grid, v, m) -> Atom`` built on :func:`make_bump_atoms`."""

    def factory(grid, v, m):
        return make_bump_atoms(grid, v, m, K, L, gamma, rng)

    factory.K, factory.L, factory.gamma = K, L, gamma
    return factory


def _symbol_l1(grid: Grid, symbol: np.ndarray) -> float:
    """``||F^-1 symbol||_1`` on the torus."""
    kern = np.fft.ifftn(symbol) / grid.cell_volume
    return float(np.sum(np.abs(kern)) * grid.cell_volume)


def _fine_bound(a: Atom, bank: FilterBank, j: int) -> float:
    """Upper bound for ``sup |phi_j * a|`` from the ``K``-th derivatives of ``a``.

    For ``j >= 1`` the symbol splits as ``F phi_j = sum_{|beta|=K} (i xi)^beta m_beta``
    with ``m_beta = K!/beta! (-i xi)^beta F phi_j / |xi|^{2K}``, so
    ``phi_j * a = sum_beta F^-1 m_beta * d^beta a`` exactly on the torus.
    For ``j = 0`` the plain bound ``||Phi||_1 ||a||_inf`` is used.
    """
    grid = a.grid
    sym = bank.symbol(j)
    if j == 0 or a.K == 0:
        return _symbol_l1(grid, sym) * float(np.max(np.abs(a.samples.data)))
    ks = grid.angular_frequencies()
    mag2 = sum(k**2 for k in ks)
    safe = np.where(mag2 > 0, mag2, 1.0)
    total = 0.0
    for beta in multi_indices(grid.dim, a.K):
        if sum(beta) != a.K:
            continue
        mono = np.ones(grid.shape, dtype=complex)
        for k, b in zip(ks, beta):
            mono = mono * (-1j * k) ** b
        coef = math.factorial(a.K) / math.prod(math.factorial(b) for b in beta)
        m_beta = np.where(mag2 > 0, coef * mono * sym / safe**a.K, 0.0)
        deriv = float(np.max(np.abs(spectral_derivative(a.samples, beta))))
        total += _symbol_l1(grid, m_beta) * deriv
    return total


def _coarse_bound(a: Atom, bank: FilterBank, j: int) -> float:
    """Upper bound for ``sup |phi_j * a|`` from a Taylor expansion of ``phi_j`` at the atom center.

    With ``z`` the minimum-image offset from the center and moments up to
    ``L`` (taken as measured, so round-off is accounted for),
    ``|phi_j * a| <= sum_{|beta|<=L} ||d^beta phi_j|| |mom_beta| / beta!
    + max_{|beta|=L+1} ||d^beta phi_j|| int |a| |z|_1^{L+1} / (L+1)!``.
    """
    grid = a.grid
    kern = bank.kernel(j)
    order = a.L + 1 if (a.v >= 1 and a.L >= 0) else 0
    zs = grid.periodic_offsets(a.cube.center)
    w = grid.cell_volume
    absa = np.abs(a.samples.data)
    derivs = {beta: float(np.max(np.abs(spectral_derivative(kern, beta))))
              for beta in multi_indices(grid.dim, order)}
    top = max(d for beta, d in derivs.items() if sum(beta) == order)
    l1 = sum(np.abs(z) for z in zs)
    bound = top * float(np.sum(absa * l1**order) * w) / math.factorial(order)
    if order > 0:
        for beta in multi_indices(grid.dim, order - 1):
            mono = np.ones(grid.shape)
            for z, b in zip(zs, beta):
                mono = mono * z**b
            mom = abs(complex(np.sum(mono * a.samples.data) * w))
            bound += derivs[beta] * mom / math.prod(math.factorial(b) for b in beta)
    return bound


def verify_fj_decay(a: Atom, bank: FilterBank, M: float = 3.0) -> dict:
    """Compare ``sup |phi_j * a|`` with the two decay laws over all usable ``j``.

    The envelopes are ``2**((v-j)K + vn/2)`` for ``j >= v`` and
    ``2**((j-v)(L+n+1) + vn/2)`` for ``j <= v``.  ``ratios[j]`` is the sup of
    the block over its envelope, and ``bounds[j]`` an explicit upper bound for
    the block sup (derivative splitting on the fine side, Taylor remainder on
    the coarse side).  The constant of each side is the largest
    ``bounds[j] / envelope_j``; the check passes when every block obeys its
    bound.  ``spatial_ratios`` additionally include the factor
    ``(1 + 2**min(v,j) |x - x_Q|)**-M`` around the cube corner ``x_Q``;
    ``successive`` holds the quotients of neighbouring block sups
    (``sup_{j+1}/sup_j`` for ``j = v+1..v+3`` on the fine side,
    ``sup_{j-1}/sup_j`` for ``j = v..1`` on the coarse side) and
    ``first_pair_holds`` tells whether later quotients stay below the first.
    """
    grid = a.grid
    if grid != bank.grid:
        raise ValueError("atom and bank live on different grids")
    n = grid.dim
    V = bank.max_level
    L_eff = a.L if (a.v >= 1 and a.L >= 0) else -1
    spec = np.fft.fftn(a.samples.data)
    dist = grid.periodic_distance(a.cube.corner)
    ratios, spatial, sups, bounds, envs = {}, {}, {}, {}, {}
    for j in range(V + 1):
        block = np.abs(np.fft.ifftn(spec * bank.symbol(j)))
        sups[j] = float(block.max())
        if j >= a.v:
            env = 2.0 ** ((a.v - j) * a.K + a.v * n / 2)
            bounds[j] = _fine_bound(a, bank, j)
        else:
            env = 2.0 ** ((j - a.v) * (L_eff + n + 1) + a.v * n / 2)
            bounds[j] = _coarse_bound(a, bank, j)
        if j == a.v:
            bounds[j] = min(bounds[j], _coarse_bound(a, bank, j))
        envs[j] = env
        ratios[j] = sups[j] / env
        spatial[j] = float(np.max(block * (1 + 2.0 ** min(a.v, j) * dist) ** M)) / env

    def side(js, quotient_js, step):
        js = [j for j in js if 0 <= j <= V]
        c = max(bounds[j] / envs[j] for j in js)
        ok = all(sups[j] <= bounds[j] * (1 + 1e-9) + 1e-15 for j in js)
        quot = {j: sups[j + step] / sups[j] for j in quotient_js if 0 <= j + step <= V and 0 <= j <= V and sups[j] > 0}
        first = next(iter(quot.values()), None)
        first_ok = first is None or all(r <= first * (1 + 1e-9) for r in quot.values())
        return {"levels": js, "constant": c, "max_ratio": max(ratios[j] for j in js), "passed": bool(ok),
                "successive": quot, "first_pair_holds": bool(first_ok)}

    # quotient window: j = v+1..v+4 above the cube level, every level below it
    fine = side(list(range(a.v, V + 1)), list(range(a.v + 1, a.v + 4)), 1)
    coarse = side(list(range(a.v, -1, -1)), list(range(a.v, 0, -1)), -1)
    return {
        "ratios": ratios,
        "spatial_ratios": spatial,
        "sups": sups,
        "bounds": bounds,
        "fine_side": fine,
        "coarse_side": coarse,
        "fine_rate": 2.0 ** (-a.K),
        "coarse_rate": 2.0 ** (-(L_eff + n + 1)),
        "passed": fine["passed"] and coarse["passed"],
    }


def atomic_synthesis(lam: CoefficientSequence, atom_factory, prm: BesovParams, space: str = "B"):
    """``f = sum lambda_{v,m} a_{v,m}`` and the ratio ``||f|| / ||lambda||``.

    Refuses factories whose ``(K, L)`` fall below :func:`required_K_L`.
    Returns ``(f, report)``.
    """
    K_min, L_min = required_K_L(prm.alpha, prm.p, prm.tau, space)
    K, L = getattr(atom_factory, "K", None), getattr(atom_factory, "L", None)
    if K is None or L is None:
        raise ValueError("atom factory must expose its K and L")
    if K < K_min or L < L_min:
        raise ValueError(f"atoms have (K, L) = ({K}, {L}); need K >= {K_min} and L >= {L_min}")
    grid = lam.grid
    total = np.zeros(grid.shape, dtype=complex)
    count = 0
    for v, m, value in lam.entries():
        total += value * atom_factory(grid, v, m).samples.data
        count += 1
    real = all(not np.any(a.imag) for a in lam.levels)
    f = grid.field(total.real if real else total)
    report = {"K": K, "L": L, "K_min": K_min, "L_min": L_min, "terms": count, "space": space}
    if count == 0:
        report.update(norm_f=0.0, norm_lambda=0.0, ratio=None)
        return f, report
    if space == "B":
        nf = besov_type_norm(f, prm)
        nl = seq_b_norm(lam, prm.alpha, prm.p, prm.q, prm.tau)
    else:
        nf = besov_tilde_norm(f, prm)
        nl = seq_b_tilde_norm(lam, prm.alpha, prm.p, prm.q)
    report.update(norm_f=nf, norm_lambda=nl, ratio=nf / nl if nl > 0 else None)
    return f, report


def quasi_atomic_decomposition(f: SampledField, bank: FilterBank, prm: BesovParams | None = None,
                               gamma: float = 3.0):
    """``lambda = S_phi f`` with the quasi-atoms ``psi_{v,m}`` (Schwartz, not compactly supported).

    The report holds the reconstruction residual, the norm ratio when
    ``prm`` is given, and the fraction of ``|psi_{1,0}|^2`` lying outside
    ``gamma Q_{1,0}`` (how far the quasi-atoms are from the support condition).
    """
    lam = phi_transform(f, bank)
    rec = inverse_phi_transform(lam, bank, real=not np.iscomplexobj(f.data))
    scale = f.sup_norm()
    report = {
        "kind": "quasi-atoms psi_{v,m} (analysis-synthesis route)",
        "residual": float(np.max(np.abs(rec.data - f.data)) / scale) if scale > 0 else 0.0,
    }
    grid = f.grid
    if bank.max_level >= 1:
        one = CoefficientSequence.from_entries(grid, bank.max_level, [(1, (0,) * grid.dim, 1.0)])
        psi = inverse_phi_transform(one, bank).data
        inside = scale_cube(DyadicCube(1, (0,) * grid.dim, grid.box_exponent), gamma, grid).mask(grid)
        energy = np.sum(np.abs(psi) ** 2)
        report["tail_fraction"] = float(np.sum(np.abs(psi[~inside]) ** 2) / energy)
    if prm is not None and scale > 0:
        nf = besov_type_norm(f, prm)
        nl = seq_b_norm(lam, prm.alpha, prm.p, prm.q, prm.tau)
        report.update(norm_f=nf, norm_lambda=nl, ratio=nl / nf)
    return lam, report
