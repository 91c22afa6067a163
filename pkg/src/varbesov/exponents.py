"""Variable exponents p(.), q(.), tau(.) and smoothness functions alpha(.).

An exponent is sampled on a :class:`~varbesov.grid.Grid`.  The value
``+inf`` is never stored as a float: infinite points are carried by a boolean
mask and the value array holds NaN there, so any computation that forgets to
branch on the mask poisons its result instead of silently using ``inf``.
"""

from __future__ import annotations

import math
import warnings
from functools import cached_property

import numpy as np

from .expression import ExpressionSyntaxError, parse
from .grid import Grid

__all__ = [
    "VariableExponent",
    "ExponentError",
    "LogHolderWarning",
    "ExpressionSyntaxError",
    "parse_exponent",
    "conjugate",
    "estimate_clog",
    "clog_of_values",
]

CLASSES = ("P0", "P", "real")


class ExponentError(ValueError):
    """An exponent violates the class it was requested in."""


class LogHolderWarning(UserWarning):
    """The estimated log-Hoelder constant exceeds the configured threshold."""


class VariableExponent:
    """An exponent function sampled on a grid.

    Parameters
    ----------
    grid : Grid
    values : array_like
        Finite samples; entries where ``infinite`` is set are ignored.
    infinite : array_like of bool, optional
        Points where the exponent is the infinity flag.
    expression : str, optional
        Source text, kept for reports.
    exponent_class : {"P0", "P", "real"}
        ``"P0"`` requires values bounded below by a positive constant,
        ``"P"`` requires values ``>= 1``, ``"real"`` (smoothness functions)
        allows any finite value and no infinity flag.
    """

    def __init__(self, grid: Grid, values, infinite=None, expression=None, exponent_class="P0"):
        if exponent_class not in CLASSES:
            raise ValueError(f"unknown exponent class {exponent_class!r}")
        vals = np.broadcast_to(np.asarray(values, dtype=float), grid.shape).copy()
        if infinite is None:
            mask = np.zeros(grid.shape, dtype=bool)
        else:
            mask = np.broadcast_to(np.asarray(infinite, dtype=bool), grid.shape).copy()
        if exponent_class == "real" and mask.any():
            raise ExponentError("smoothness functions cannot take the infinity flag")
        vals[mask] = np.nan
        finite = vals[~mask]
        if not np.all(np.isfinite(finite)):
            raise ExponentError("exponent values must be finite away from the infinity flag")
        if exponent_class == "P0" and finite.size and finite.min() <= 0:
            raise ExponentError("exponent of class P0 takes a non-positive value")
        if exponent_class == "P" and finite.size and finite.min() < 1:
            raise ExponentError("exponent of class P takes a value below 1")
        vals.setflags(write=False)
        mask.setflags(write=False)
        self.grid = grid
        self.values = vals
        self.infinite = mask
        self.expression = expression
        self.exponent_class = exponent_class

    # construction helpers
    @classmethod
    def constant(cls, grid: Grid, value, exponent_class="P0"):
        if value == math.inf:
            return cls.infinity(grid)
        return cls(grid, float(value), expression=repr(float(value)), exponent_class=exponent_class)

    @classmethod
    def infinity(cls, grid: Grid):
        return cls(grid, 0.0, infinite=True, expression="inf", exponent_class="P0")

    @classmethod
    def from_values(cls, grid: Grid, values, exponent_class="P0", expression=None):
        return cls(grid, values, expression=expression, exponent_class=exponent_class)

    # bounds and flags
    @property
    def allows_zero(self) -> bool:
        """True for class P0 (range bounded below by some c > 0 rather than by 1)."""
        return self.exponent_class == "P0"

    @property
    def has_infinity(self) -> bool:
        return bool(self.infinite.any())

    @property
    def is_infinite(self) -> bool:
        return bool(self.infinite.all())

    def finite_values(self) -> np.ndarray:
        return self.values[~self.infinite]

    @cached_property
    def lower_bound(self) -> float:
        finite = self.finite_values()
        return float(finite.min()) if finite.size else math.inf

    @cached_property
    def upper_bound(self) -> float:
        if self.has_infinity:
            return math.inf
        return float(self.values.max())

    @property
    def is_constant(self) -> bool:
        if self.is_infinite:
            return True
        if self.has_infinity:
            return False
        return self.lower_bound == self.upper_bound

    @property
    def constant_value(self) -> float:
        if not self.is_constant:
            raise ExponentError("exponent is not constant")
        return math.inf if self.is_infinite else self.lower_bound

    @property
    def value_at_infinity(self) -> float:
        """Stand-in for the limit at infinity: the mean of the finite samples.

        Only kept as metadata; on a bounded box the decay condition is vacuous.
        """
        finite = self.finite_values()
        return float(finite.mean()) if finite.size else math.inf

    @cached_property
    def clog_local(self) -> float:
        if self.has_infinity:
            return math.inf
        return estimate_clog(self)

    def reciprocal(self) -> np.ndarray:
        """``1/p`` as a plain array, with ``1/inf = 0``."""
        out = np.zeros(self.grid.shape)
        fin = ~self.infinite
        out[fin] = 1.0 / self.values[fin]
        return out

    def __repr__(self):
        label = self.expression if self.expression is not None else "<samples>"
        return (
            f"VariableExponent({label!s}, class={self.exponent_class}, "
            f"range=[{self.lower_bound:.6g}, {self.upper_bound:.6g}])"
        )


def parse_exponent(text: str, grid: Grid, exponent_class="P0") -> VariableExponent:
    """Parse an expression and sample it on ``grid``.

    Parameters
    ----------
    text : str
        Expression in ``x`` (and ``y`` in 2-D), or the single word ``inf``.
    grid : Grid
    exponent_class : {"P0", "P", "real"}

    Raises
    ------
    ExpressionSyntaxError
        Malformed text, with the character offset.
    ExponentError
        Values outside the requested class.
    """
    if text.strip() == "inf":
        if exponent_class == "real":
            raise ExponentError("smoothness functions cannot take the infinity flag")
        return VariableExponent.infinity(grid)
    tree = parse(text)
    if "y" in tree.variables() and grid.dim < 2:
        raise ExponentError("variable 'y' is only available on 2-D grids")
    values = tree.evaluate(grid.coordinate_dict())
    values = np.broadcast_to(np.asarray(values, dtype=float), grid.shape)
    return VariableExponent(grid, values, expression=text, exponent_class=exponent_class)


def conjugate(p: VariableExponent) -> VariableExponent:
    """Pointwise conjugate exponent, ``1/p + 1/p' = 1``, with ``1/inf = 0``."""
    if p.lower_bound < 1:
        raise ExponentError("the conjugate exponent needs p >= 1")
    vals = np.ones(p.grid.shape)
    ones = (~p.infinite) & (p.values == 1.0)
    regular = (~p.infinite) & ~ones
    vals[regular] = p.values[regular] / (p.values[regular] - 1.0)
    expr = None if p.expression is None else f"conjugate({p.expression})"
    return VariableExponent(p.grid, vals, infinite=ones, expression=expr, exponent_class="P")


def _offset_set(n: int) -> np.ndarray:
    """Deterministic integer offsets 1..n-1: all small ones, geometric beyond."""
    if n < 2:
        return np.zeros(0, dtype=int)
    small = np.arange(1, min(64, n - 1) + 1)
    if n - 1 <= 64:
        return small
    big = np.unique(np.round(np.geomspace(64, n - 1, 160)).astype(int))
    return np.unique(np.concatenate([small, big, [n - 1]]))


def clog_of_values(grid: Grid, values: np.ndarray) -> float:
    """Pair-scan estimate of the log-Hoelder constant of finite samples."""
    g = np.asarray(values, dtype=float)
    h = grid.spacing
    n = grid.side_points
    best = 0.0
    offsets = _offset_set(n)
    if grid.dim == 1:
        for k in offsets:
            diff = np.max(np.abs(g[k:] - g[:-k]))
            best = max(best, diff * math.log(math.e + 1.0 / (k * h)))
        return float(best)
    for k in offsets:
        dist = k * h
        weight = math.log(math.e + 1.0 / dist)
        diag = math.log(math.e + 1.0 / (math.sqrt(2) * dist))
        best = max(
            best,
            np.max(np.abs(g[k:, :] - g[:-k, :])) * weight,
            np.max(np.abs(g[:, k:] - g[:, :-k])) * weight,
            np.max(np.abs(g[k:, k:] - g[:-k, :-k])) * diag,
            np.max(np.abs(g[k:, :-k] - g[:-k, k:])) * diag,
        )
    return float(best)


def estimate_clog(g: VariableExponent, threshold: float | None = None) -> float:
    """Lower estimate of the log-Hoelder constant of ``g``.

    Takes the maximum of ``|g(x) - g(y)| * log(e + 1/|x - y|)`` over a
    deterministic subsample of grid pairs: every anchor point combined with
    all offsets up to 64 cells and a geometric ladder of longer offsets
    (axis and diagonal directions in 2-D).  Distances are Euclidean inside
    the box.

    Parameters
    ----------
    g : VariableExponent
    threshold : float, optional
        When the estimate exceeds it a :class:`LogHolderWarning` is emitted,
        flagging that ``g`` does not look log-Hoelder at this resolution.
    """
    if g.has_infinity:
        raise ExponentError("log-Hoelder estimate needs a finite exponent")
    value = clog_of_values(g.grid, g.values)
    if threshold is not None and value > threshold:
        warnings.warn(
            f"estimated log-Hoelder constant {value:.4g} exceeds threshold {threshold:.4g}",
            LogHolderWarning,
            stacklevel=2,
        )
    return value
