"""Regular-lattice discretization of a domain with an interior mask.

The lattice covers the domain's bounding box with a margin of 2h on every
side.  A node is interior iff its center lies in the open domain; each
node represents the cell of volume h^N centered at it, so the union of
all cells is the node bounding box fattened by h/2 (``cell_box``), which
is the region the pair weights treat as "inside" when splitting the
Gagliardo integral into a lattice sum plus an exterior tail.
"""

from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np

from .domain import DomainSpec
from .errors import DegenerateDomain, TooCoarse

MARGIN_CELLS = 2  # bounding-box margin in units of h


@dataclass(frozen=True)
class Grid:
    """Immutable lattice; nodes are ordered row-major over lattice indices
    (last axis fastest)."""

    spec: DomainSpec
    dim: int
    h: float
    shape: tuple
    axes: tuple              # per-dimension node coordinates
    nodes: np.ndarray        # (n_nodes, dim) coordinates
    interior_mask: np.ndarray
    bbox_lo: np.ndarray      # node-range box
    bbox_hi: np.ndarray
    interior_index: np.ndarray = field(repr=False, default=None)

    @property
    def n_nodes(self) -> int:
        return self.nodes.shape[0]

    @property
    def n_interior(self) -> int:
        return int(self.interior_mask.sum())

    @property
    def cell_volume(self) -> float:
        return self.h ** self.dim

    @property
    def cell_box(self):
        """Union of all node cells: the node box fattened by h/2."""
        return self.bbox_lo - 0.5 * self.h, self.bbox_hi + 0.5 * self.h

    @property
    def interior_nodes(self) -> np.ndarray:
        return self.nodes[self.interior_mask]

    @property
    def exterior_nodes(self) -> np.ndarray:
        return self.nodes[~self.interior_mask]

    def domain_volume(self) -> float:
        """Lattice measure of the domain, |Omega_h| = n_interior * h^N."""
        return self.n_interior * self.cell_volume

    def index_of(self, multi_index) -> int:
        return int(np.ravel_multi_index(multi_index, self.shape))

    def multi_index_of(self, flat: int) -> tuple:
        return tuple(int(k) for k in np.unravel_index(flat, self.shape))


def build_grid(spec: DomainSpec, h: float) -> Grid:
    """Lay a regular lattice of spacing h over the domain's bounding box.

    Raises TooCoarse when fewer than 3 interior nodes result and
    DegenerateDomain when none do.
    """
    if not h > 0:
        raise ValueError("spacing h must be positive")
    lo, hi = spec.bounding_box()
    lo = np.atleast_1d(np.asarray(lo, dtype=float)) - MARGIN_CELLS * h
    hi = np.atleast_1d(np.asarray(hi, dtype=float)) + MARGIN_CELLS * h
    dim = lo.size
    if dim not in (1, 2):
        raise ValueError("only N in {1, 2} is supported")

    axes = []
    for d in range(dim):
        # anchor at the bbox center so symmetric domains get symmetric
        # lattices (origin-centered ones exactly, by sign symmetry of *)
        c = 0.5 * (lo[d] + hi[d])
        m = int(np.ceil(0.5 * (hi[d] - lo[d]) / h - 1e-12))
        axes.append(c + h * np.arange(-m, m + 1))
    shape = tuple(ax.size for ax in axes)

    if dim == 1:
        nodes = axes[0][:, None]
    else:
        X0, X1 = np.meshgrid(axes[0], axes[1], indexing="ij")
        nodes = np.column_stack([X0.ravel(), X1.ravel()])

    mask = np.fromiter(
        (spec.contains(pt) for pt in nodes), dtype=bool, count=nodes.shape[0]
    )
    n_int = int(mask.sum())
    if n_int == 0:
        raise DegenerateDomain("domain contains no lattice node")
    if n_int < 3:
        raise TooCoarse(f"only {n_int} interior nodes at h={h}; need at least 3")

    interior_index = np.flatnonzero(mask)
    return Grid(
        spec=spec,
        dim=dim,
        h=float(h),
        shape=shape,
        axes=tuple(axes),
        nodes=nodes,
        interior_mask=mask,
        bbox_lo=np.array([ax[0] for ax in axes]),
        bbox_hi=np.array([ax[-1] for ax in axes]),
        interior_index=interior_index,
    )
