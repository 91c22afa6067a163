"""Besov-type norms with variable smoothness and integrability.

Every cube-sup norm here is the engine in :mod:`varbesov.cubenorms` applied
to the weighted block magnitudes ``2**(v alpha(x)) |phi_v * f(x)|``.  The
constant-exponent evaluators at the bottom are deliberately written without
that engine (plain slicing and closed-form powers) so they can serve as
independent oracles.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from .cubenorms import CubeSupResult, cube_sup_norm
from .exponents import VariableExponent, parse_exponent
from .filterbank import FilterBank
from .grid import SampledField
from .varlp import DEFAULT_TOL, _check_q, mixed_norm, morrey_norm

__all__ = [
    "BesovParams",
    "weighted_blocks",
    "besov_cube_norm",
    "besov_type_norm",
    "besov_tilde_norm",
    "besov_norm_sharp",
    "besov_norm_star",
    "besov_variable_norm",
    "besov_morrey_norm",
    "classical_besov_type_norm",
    "classical_besov_norm",
    "linfty_smoothness_norm",
]


@dataclass(frozen=True)
class BesovParams:
    """Parameters ``alpha, p, q, tau`` and the filter bank of a Besov-type space.

    ``tau`` may be None for the spaces that do not use it.  ``top_level``
    truncates the level range (default: the bank's ``V``).
    """

    alpha: VariableExponent
    p: VariableExponent
    q: VariableExponent
    tau: VariableExponent | None
    bank: FilterBank
    top_level: int | None = None

    def __post_init__(self):
        grid = self.bank.grid
        for name in ("alpha", "p", "q", "tau"):
            e = getattr(self, name)
            if e is not None and e.grid != grid:
                raise ValueError(f"{name} lives on a different grid than the filter bank")
        if self.alpha.has_infinity:
            raise ValueError("alpha must be finite")
        _check_q(self.q)
        if self.top_level is not None and not 0 <= self.top_level <= self.bank.max_level:
            raise ValueError("top_level outside the bank's level range")

    @property
    def grid(self):
        return self.bank.grid

    @property
    def V(self) -> int:
        return self.bank.max_level if self.top_level is None else self.top_level

    @classmethod
    def from_expressions(cls, bank: FilterBank, alpha: str, p: str, q: str, tau: str | None = None,
                         top_level=None):
        grid = bank.grid
        return cls(
            parse_exponent(alpha, grid, "real"),
            parse_exponent(p, grid),
            parse_exponent(q, grid),
            None if tau is None else parse_exponent(tau, grid),
            bank,
            top_level,
        )

    def describe(self) -> dict:
        def label(e):
            return None if e is None else (e.expression if e.expression is not None else "<samples>")

        return {
            "alpha": label(self.alpha),
            "p": label(self.p),
            "q": label(self.q),
            "tau": label(self.tau),
            "V": self.V,
            **{f"bank_{k}": v for k, v in self.bank.describe().items()},
        }


def _symbols(bank: FilterBank, V: int, gamma: int):
    """(index, multiplier) pairs of the level system, the lowest index carrying Phi."""
    if gamma == 0:
        return [(v, bank.symbol(v)) for v in range(V + 1)]
    if gamma > bank.grid.box_exponent:
        raise ValueError(f"gamma = {gamma} too large: dilated Phi does not fit the box")
    out = [(-gamma, bank.low_symbol(-gamma))]
    out += [(j, bank.band_symbol(j)) for j in range(-gamma + 1, V + 1)]
    return out


def weighted_blocks(f: SampledField, alpha: VariableExponent, bank: FilterBank, V: int | None = None,
                    gamma: int = 0):
    """Indices and magnitudes ``2**(j alpha) |phi_j * f|`` of the level system.

    With ``gamma > 0`` the system starts at ``-gamma`` with the dilated
    low-pass ``Phi(2**gamma .)`` and continues with annuli from ``-gamma + 1``.
    """
    if f.grid != bank.grid:
        raise ValueError("field and filter bank live on different grids")
    V = bank.max_level if V is None else V
    spec = np.fft.fftn(f.data)
    indices, mags = [], []
    for j, sym in _symbols(bank, V, gamma):
        block = np.abs(np.fft.ifftn(spec * sym))
        mags.append(2.0 ** (j * alpha.values) * block)
        indices.append(j)
    return np.asarray(indices), np.stack(mags)


def besov_cube_norm(f: SampledField, prm: BesovParams, *, space: str = "B", variant: str = "base",
                    gamma: int = 0, tol: float = DEFAULT_TOL, threads=None) -> CubeSupResult:
    """Cube-sup Besov-type norm with the maximizing cube.

    Parameters
    ----------
    space : {"B", "tilde"}
        ``"B"`` normalizes by ``||chi_P||_tau``, ``"tilde"`` by ``|P|^{1/p(x)}``.
    variant : {"base", "sharp", "star"}
        ``"sharp"`` restricts to ``|P| <= 1`` with windows ``v >= v_P``;
        ``"star"`` extends each window down by ``gamma`` (for ``"tilde"``
        the star family is the sharp one, ``|P| <= 1`` and ``v >= v_P - gamma``).
    """
    if space == "B" and prm.tau is None:
        raise ValueError("the B space needs tau")
    if space not in ("B", "tilde"):
        raise ValueError(f"unknown space {space!r}")
    if variant not in ("base", "sharp", "star"):
        raise ValueError(f"unknown variant {variant!r}")
    if variant != "star":
        gamma = 0
    elif gamma < 0:
        raise ValueError("gamma must be >= 0")
    indices, mags = weighted_blocks(f, prm.alpha, prm.bank, prm.V, gamma)
    return cube_sup_norm(
        mags,
        indices,
        prm.p,
        prm.q,
        normalization="tau" if space == "B" else "p",
        tau=prm.tau,
        window="sharp" if variant == "sharp" or (variant == "star" and space == "tilde") else "plus",
        shift=gamma,
        tol=tol,
        threads=threads,
    )


def besov_type_norm(f, prm, tol=DEFAULT_TOL, threads=None) -> float:
    """``sup_P || (2^{v alpha} phi_v * f chi_P / ||chi_P||_tau)_{v >= v_P+} ||_{l^q(L^p)}``."""
    return besov_cube_norm(f, prm, tol=tol, threads=threads).value


def besov_tilde_norm(f, prm, tol=DEFAULT_TOL, threads=None) -> float:
    """As :func:`besov_type_norm` with the pointwise weight ``|P|^{-1/p(x)}``."""
    return besov_cube_norm(f, prm, space="tilde", tol=tol, threads=threads).value


def besov_norm_sharp(f, prm, space="B", tol=DEFAULT_TOL, threads=None) -> float:
    """Restricted sup over cubes with ``|P| <= 1`` and windows ``v >= v_P``."""
    return besov_cube_norm(f, prm, space=space, variant="sharp", tol=tol, threads=threads).value


def besov_norm_star(f, prm, gamma: int, space="B", tol=DEFAULT_TOL, threads=None) -> float:
    """Windows ``v >= v_P+ - gamma`` with the dilated low-pass at ``-gamma``."""
    return besov_cube_norm(f, prm, space=space, variant="star", gamma=gamma, tol=tol, threads=threads).value


def besov_variable_norm(f: SampledField, alpha, p, q, bank: FilterBank, V=None, tol=DEFAULT_TOL) -> float:
    """``|| (2^{v alpha} phi_v * f)_{v >= 0} ||_{l^q(L^p)}`` (no cube sup)."""
    _, mags = weighted_blocks(f, alpha, bank, V)
    grid = bank.grid
    return mixed_norm(p, q, [grid.field(m) for m in mags], tol)


def besov_morrey_norm(f: SampledField, alpha, p: float, q: float, u: float, bank: FilterBank, V=None) -> float:
    """``(sum_v || 2^{v alpha} phi_v * f ||_{M_u^p}^q)^{1/q}`` for constants ``0 < u <= p``, ``q``."""
    if not 0 < u <= p < math.inf:
        raise ValueError("Besov-Morrey norm needs 0 < u <= p < inf")
    if q <= 0:
        raise ValueError("q must be positive")
    _, mags = weighted_blocks(f, alpha, bank, V)
    grid = bank.grid
    levels = np.array([morrey_norm(u, p, grid.field(m)) for m in mags])
    if q == math.inf:
        return float(levels.max())
    return float(np.sum(levels**q) ** (1.0 / q))


def linfty_smoothness_norm(f: SampledField, s, bank: FilterBank, V=None) -> float:
    """``sup_{v, x} 2^{v s(x)} |phi_v * f(x)|``, the ``B_{inf,inf}^{s}`` norm.

    ``s`` is a VariableExponent (class "real") or a plain array of samples.
    """
    values = s.values if isinstance(s, VariableExponent) else np.asarray(s, dtype=float)
    V = bank.max_level if V is None else V
    spec = np.fft.fftn(f.data)
    best = 0.0
    for v in range(V + 1):
        block = np.abs(np.fft.ifftn(spec * bank.symbol(v)))
        best = max(best, float(np.max(2.0 ** (v * values) * block)))
    return best


# Independent constant-exponent evaluators


def _classical_blocks(f, bank, V):
    spec = np.fft.fftn(f.data)
    return [np.fft.ifftn(spec * bank.symbol(v)) for v in range(V + 1)]


def _cube_slices(grid, vP):
    per_axis = 2 ** (grid.box_exponent + vP)
    pts = 2 ** (grid.resolution_exponent - vP)
    ranges = [range(per_axis)] * grid.dim
    for m in np.ndindex(*[len(r) for r in ranges]):
        yield tuple(slice(i * pts, (i + 1) * pts) for i in m)


def classical_besov_type_norm(f: SampledField, alpha: float, p: float, q: float, tau_display: float,
                              bank: FilterBank, V=None) -> float:
    """``sup_P |P|^{-tau} (sum_{v >= v_P+} 2^{v alpha q} ||(phi_v * f) chi_P||_p^q)^{1/q}``.

    ``tau_display`` is the exponent of ``|P|`` in this classical form, i.e. the
    reciprocal of the ``tau`` used with ``||chi_P||_tau``.  Plain loop over
    cubes; meant as an oracle, not for speed.
    """
    grid = f.grid
    V = bank.max_level if V is None else V
    blocks = [np.abs(b) for b in _classical_blocks(f, bank, V)]
    w = grid.cell_volume
    best = 0.0
    for vP in range(-grid.box_exponent, min(V, grid.resolution_exponent) + 1):
        vol = 2.0 ** (-vP * grid.dim)
        start = max(vP, 0)
        for sl in _cube_slices(grid, vP):
            terms = []
            for v in range(start, V + 1):
                piece = blocks[v][sl]
                if p == math.inf:
                    lp = piece.max()
                else:
                    lp = (np.sum(piece**p) * w) ** (1.0 / p)
                terms.append(2.0 ** (v * alpha) * lp)
            terms = np.array(terms)
            total = terms.max() if q == math.inf else np.sum(terms**q) ** (1.0 / q)
            best = max(best, float(total / vol**tau_display))
    return best


def classical_besov_norm(f: SampledField, alpha: float, p: float, q: float, bank: FilterBank, V=None) -> float:
    """``(sum_v 2^{v alpha q} ||phi_v * f||_p^q)^{1/q}`` for constant exponents."""
    V = bank.max_level if V is None else V
    w = f.grid.cell_volume
    terms = []
    for v, b in enumerate(_classical_blocks(f, bank, V)):
        a = np.abs(b)
        lp = a.max() if p == math.inf else (np.sum(a**p) * w) ** (1.0 / p)
        terms.append(2.0 ** (v * alpha) * lp)
    terms = np.array(terms)
    return float(terms.max() if q == math.inf else np.sum(terms**q) ** (1.0 / q))
