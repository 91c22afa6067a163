"""Periodic grids, sampled fields, quadrature and dyadic cubes.

The domain is the torus ``[0, 2**J0)**n`` with ``n`` in ``{1, 2}``, sampled
at spacing ``h = 2**-J``.  A dyadic cube ``Q_{v,m}`` has side ``2**-v`` and
corner ``2**-v * m``; levels run from ``-J0`` (the whole box) to ``J`` (one
grid cell).
"""

from __future__ import annotations

import itertools
from dataclasses import dataclass, field

import numpy as np

__all__ = [
    "Grid",
    "SampledField",
    "DyadicCube",
    "CubeRegion",
    "cubes_at_level",
    "cube_geometry",
    "scale_cube",
    "cube_mask",
    "cube_contains",
    "integrate",
    "level_blocks",
    "from_level_blocks",
    "lattice_shape",
]


@dataclass(frozen=True)
class Grid:
    """Uniform periodic grid on ``[0, 2**box_exponent)**dim``.

    Parameters
    ----------
    dim : int
        Spatial dimension, 1 or 2.
    box_exponent : int
        ``J0``; the box side is ``2**J0``.
    resolution_exponent : int
        ``J``; the spacing is ``2**-J``.
    """

    dim: int
    box_exponent: int
    resolution_exponent: int

    def __post_init__(self):
        if self.dim not in (1, 2):
            raise ValueError("only dimensions 1 and 2 are supported")
        if self.box_exponent < 0:
            raise ValueError("box_exponent must be >= 0")
        if self.resolution_exponent < 1:
            raise ValueError("resolution_exponent must be >= 1")

    @property
    def side_points(self) -> int:
        return 2 ** (self.box_exponent + self.resolution_exponent)

    @property
    def shape(self) -> tuple:
        return (self.side_points,) * self.dim

    @property
    def size(self) -> int:
        return self.side_points**self.dim

    @property
    def spacing(self) -> float:
        return 2.0**-self.resolution_exponent

    @property
    def box_length(self) -> float:
        return 2.0**self.box_exponent

    @property
    def cell_volume(self) -> float:
        return self.spacing**self.dim

    @property
    def box_volume(self) -> float:
        return self.box_length**self.dim

    @property
    def max_level(self) -> int:
        """Highest Littlewood-Paley level resolved by this grid, ``J - 2``."""
        return self.resolution_exponent - 2

    def axis(self) -> np.ndarray:
        return np.arange(self.side_points) * self.spacing

    def coordinates(self) -> tuple:
        """Coordinate arrays of shape ``self.shape``, one per axis."""
        ax = self.axis()
        if self.dim == 1:
            return (ax,)
        return tuple(np.meshgrid(ax, ax, indexing="ij"))

    def coordinate_dict(self) -> dict:
        names = ("x", "y")
        return dict(zip(names, self.coordinates()))

    def angular_frequencies(self) -> tuple:
        """Angular frequencies ``2*pi*k / box_length`` broadcast to ``self.shape``."""
        k = np.fft.fftfreq(self.side_points, d=self.spacing) * 2 * np.pi
        if self.dim == 1:
            return (k,)
        return tuple(np.meshgrid(k, k, indexing="ij"))

    def frequency_magnitude(self) -> np.ndarray:
        return np.sqrt(sum(k**2 for k in self.angular_frequencies()))

    def periodic_offsets(self, center) -> tuple:
        """Minimum-image displacement of every grid point from ``center``."""
        center = np.broadcast_to(np.asarray(center, dtype=float), (self.dim,))
        out = []
        for c, coord in zip(center, self.coordinates()):
            d = coord - c
            d = d - self.box_length * np.round(d / self.box_length)
            out.append(d)
        return tuple(out)

    def periodic_distance(self, center) -> np.ndarray:
        return np.sqrt(sum(d**2 for d in self.periodic_offsets(center)))

    def field(self, data) -> "SampledField":
        return SampledField(self, data)

    def zeros(self) -> "SampledField":
        return SampledField(self, np.zeros(self.shape))

    def describe(self) -> dict:
        return {"dim": self.dim, "J0": self.box_exponent, "J": self.resolution_exponent}


@dataclass(frozen=True, eq=False)
class SampledField:
    """Samples of a function on every point of ``grid`` (row-major, ij order)."""

    grid: Grid
    data: np.ndarray

    def __post_init__(self):
        data = np.asarray(self.data)
        if data.dtype.kind not in "fc":
            data = data.astype(float)
        if data.shape != self.grid.shape:
            if data.size == self.grid.size:
                data = data.reshape(self.grid.shape)
            else:
                raise ValueError(f"data of shape {data.shape} does not match grid {self.grid.shape}")
        if not np.all(np.isfinite(data)):
            raise ValueError("field values must be finite")
        object.__setattr__(self, "data", data)

    @property
    def is_complex(self) -> bool:
        return self.data.dtype.kind == "c"

    def abs(self) -> "SampledField":
        return SampledField(self.grid, np.abs(self.data))

    def sup_norm(self) -> float:
        return float(np.max(np.abs(self.data))) if self.data.size else 0.0

    def _other(self, other):
        if isinstance(other, SampledField):
            if other.grid != self.grid:
                raise ValueError("fields live on different grids")
            return other.data
        return other

    def __add__(self, other):
        return SampledField(self.grid, self.data + self._other(other))

    __radd__ = __add__

    def __sub__(self, other):
        return SampledField(self.grid, self.data - self._other(other))

    def __rsub__(self, other):
        return SampledField(self.grid, self._other(other) - self.data)

    def __mul__(self, other):
        return SampledField(self.grid, self.data * self._other(other))

    __rmul__ = __mul__

    def __truediv__(self, other):
        return SampledField(self.grid, self.data / self._other(other))

    def __neg__(self):
        return SampledField(self.grid, -self.data)


@dataclass(frozen=True)
class DyadicCube:
    """The cube ``Q_{v,m}`` of side ``2**-v`` with corner ``2**-v * m``.

    When ``box_exponent`` is given the index ``m`` is reduced modulo the
    number of cubes per axis, so periodic shifts name the same cube.
    """

    v: int
    m: tuple
    box_exponent: int | None = field(default=None, compare=False)

    def __post_init__(self):
        m = tuple(int(i) for i in np.atleast_1d(self.m))
        if self.box_exponent is not None:
            if self.v < -self.box_exponent:
                raise ValueError(f"cube level {self.v} is larger than the box")
            per_axis = 2 ** (self.box_exponent + self.v)
            m = tuple(i % per_axis for i in m)
        object.__setattr__(self, "m", m)

    @property
    def dim(self) -> int:
        return len(self.m)

    @property
    def side(self) -> float:
        return 2.0**-self.v

    @property
    def corner(self) -> tuple:
        return tuple(self.side * i for i in self.m)

    @property
    def center(self) -> tuple:
        return tuple(self.side * (i + 0.5) for i in self.m)

    @property
    def volume(self) -> float:
        return self.side**self.dim

    @property
    def level_plus(self) -> int:
        return max(self.v, 0)


@dataclass(frozen=True)
class CubeRegion:
    """An axis-parallel cube given by center and side, on a periodic box."""

    center: tuple
    side: float

    def mask(self, grid: Grid) -> np.ndarray:
        half = self.side / 2
        inside = np.ones(grid.shape, dtype=bool)
        if self.side >= grid.box_length:
            return inside
        for d in grid.periodic_offsets(self.center):
            # half-open in the positive direction, like Q_{v,m}
            inside &= (d >= -half - 1e-12) & (d < half - 1e-12)
        return inside


def lattice_shape(grid: Grid, v: int) -> tuple:
    """Shape of the cube index lattice at level ``v``."""
    return (2 ** (grid.box_exponent + v),) * grid.dim


def _check_level(grid: Grid, v: int):
    if not -grid.box_exponent <= v <= grid.resolution_exponent:
        raise ValueError(
            f"cube level {v} outside [{-grid.box_exponent}, {grid.resolution_exponent}]"
        )


def cubes_at_level(grid: Grid, v: int) -> list:
    """All ``2**(n*(J0+v))`` cubes of level ``v`` tiling the box, row-major in ``m``."""
    _check_level(grid, v)
    per_axis = 2 ** (grid.box_exponent + v)
    return [
        DyadicCube(v, m, grid.box_exponent)
        for m in itertools.product(range(per_axis), repeat=grid.dim)
    ]


def cube_geometry(Q: DyadicCube) -> tuple:
    """Return ``(side, corner, v_Q, v_Q_plus)``."""
    corner = Q.corner[0] if Q.dim == 1 else Q.corner
    return Q.side, corner, Q.v, Q.level_plus


def scale_cube(Q: DyadicCube, r: float, grid: Grid | None = None) -> CubeRegion:
    """Concentric cube ``rQ``; with a grid the side is clipped to the box."""
    if r <= 0:
        raise ValueError("dilation factor must be positive")
    side = r * Q.side
    if grid is not None:
        side = min(side, grid.box_length)
    return CubeRegion(Q.center, side)


def cube_mask(grid: Grid, Q: DyadicCube) -> np.ndarray:
    """Boolean indicator of the grid points lying in ``Q``."""
    _check_level(grid, Q.v)
    pts = 2 ** (grid.resolution_exponent - Q.v)
    mask = np.zeros(grid.shape, dtype=bool)
    index = tuple(slice(i * pts, (i + 1) * pts) for i in Q.m)
    mask[index] = True
    return mask


def cube_contains(outer: DyadicCube, inner: DyadicCube) -> bool:
    """True when ``inner`` lies inside ``outer`` (corner arithmetic)."""
    if inner.v < outer.v:
        return False
    shift = inner.v - outer.v
    return all((mi >> shift) == mo for mi, mo in zip(inner.m, outer.m))


def integrate(f: SampledField):
    """Rectangle-rule integral over the box."""
    total = np.sum(f.data) * f.grid.cell_volume
    return float(total) if not f.is_complex else complex(total)


def level_blocks(data: np.ndarray, grid: Grid, v: int) -> np.ndarray:
    """Regroup grid samples by the cubes of level ``v``.

    Returns an array of shape ``data.shape[:-dim] + (n_cubes, points_per_cube)``
    whose cube axis follows the order of :func:`cubes_at_level`.
    """
    _check_level(grid, v)
    per_axis = 2 ** (grid.box_exponent + v)
    pts = 2 ** (grid.resolution_exponent - v)
    lead = data.shape[: data.ndim - grid.dim]
    if grid.dim == 1:
        return data.reshape(lead + (per_axis, pts))
    k = len(lead)
    arr = data.reshape(lead + (per_axis, pts, per_axis, pts))
    arr = np.moveaxis(arr, k + 2, k + 1)
    return arr.reshape(lead + (per_axis * per_axis, pts * pts))


def from_level_blocks(blocks: np.ndarray, grid: Grid, v: int) -> np.ndarray:
    """Inverse of :func:`level_blocks`."""
    per_axis = 2 ** (grid.box_exponent + v)
    pts = 2 ** (grid.resolution_exponent - v)
    lead = blocks.shape[:-2]
    if grid.dim == 1:
        return blocks.reshape(lead + grid.shape)
    k = len(lead)
    arr = blocks.reshape(lead + (per_axis, per_axis, pts, pts))
    arr = np.moveaxis(arr, k + 1, k + 2)
    return arr.reshape(lead + grid.shape)
