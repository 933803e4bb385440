"""Grid fields: real values on lattice nodes, zero outside the domain.

A Field is the discrete stand-in for a member of the zero-exterior
fractional Sobolev space: its values vanish identically on exterior
nodes, which the constructor enforces.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .errors import GridMismatch
from .grid import Grid


@dataclass(frozen=True)
class Field:
    grid: Grid
    values: np.ndarray

    def __post_init__(self):
        v = np.asarray(self.values, dtype=float)
        if v.shape != (self.grid.n_nodes,):
            raise ValueError(f"values shape {v.shape} != ({self.grid.n_nodes},)")
        if not np.all(np.isfinite(v)):
            raise ValueError("field values must be finite")
        if v[~self.grid.interior_mask].any():
            raise ValueError("field must vanish on exterior nodes")
        object.__setattr__(self, "values", v)

    @property
    def interior_values(self) -> np.ndarray:
        return self.values[self.grid.interior_mask]

    def with_interior(self, vi: np.ndarray) -> "Field":
        return from_interior(self.grid, vi)

    def scaled(self, t: float) -> "Field":
        return Field(self.grid, self.values * float(t))

    def is_zero(self) -> bool:
        return not self.values.any()

    def interpolate(self, points) -> np.ndarray:
        """Multilinear interpolation at arbitrary points (0 outside the
        node box, matching the zero exterior extension)."""
        return interpolate_lattice(self.grid, self.values, points)


def zeros(grid: Grid) -> Field:
    return Field(grid, np.zeros(grid.n_nodes))


def from_interior(grid: Grid, vi) -> Field:
    vi = np.asarray(vi, dtype=float)
    if vi.shape != (grid.n_interior,):
        raise ValueError(f"expected {grid.n_interior} interior values, got {vi.shape}")
    full = np.zeros(grid.n_nodes)
    full[grid.interior_mask] = vi
    return Field(grid, full)


def from_function(grid: Grid, f) -> Field:
    """Sample a callable f(points) -> values on interior nodes only."""
    vals = np.asarray(f(grid.interior_nodes), dtype=float)
    return from_interior(grid, vals)


def check_same_grid(field: Field, other_grid: Grid):
    if field.grid is not other_grid:
        # allow structurally identical grids (e.g. reloaded from disk)
        g = field.grid
        same = (
            g.dim == other_grid.dim
            and g.h == other_grid.h
            and g.shape == other_grid.shape
            and np.array_equal(g.bbox_lo, other_grid.bbox_lo)
        )
        if not same:
            raise GridMismatch("field and weights live on different grids")


def interpolate_lattice(grid: Grid, values: np.ndarray, points) -> np.ndarray:
    pts = np.atleast_2d(np.asarray(points, dtype=float))
    if pts.shape[1] != grid.dim:
        raise ValueError(f"points must have dim {grid.dim}")
    h = grid.h
    out = np.zeros(pts.shape[0])
    vol = values.reshape(grid.shape)

    # fractional lattice coordinates, clipped cells handled by zero padding
    frac = (pts - grid.bbox_lo) / h
    inside = np.all((frac >= 0) & (frac <= np.array(grid.shape) - 1), axis=1)
    if not inside.any():
        return out
    f = frac[inside]
    i0 = np.minimum(np.floor(f).astype(int), np.array(grid.shape) - 2)
    i0 = np.maximum(i0, 0)
    t = f - i0
    if grid.dim == 1:
        v0 = vol[i0[:, 0]]
        v1 = vol[i0[:, 0] + 1]
        out[inside] = v0 * (1 - t[:, 0]) + v1 * t[:, 0]
    else:
        ix, iy = i0[:, 0], i0[:, 1]
        tx, ty = t[:, 0], t[:, 1]
        out[inside] = (
            vol[ix, iy] * (1 - tx) * (1 - ty)
            + vol[ix + 1, iy] * tx * (1 - ty)
            + vol[ix, iy + 1] * (1 - tx) * ty
            + vol[ix + 1, iy + 1] * tx * ty
        )
    return out
