"""Uniform tensor-product grids on boxes, boundary distance, subdomains.

All spatial objects in the package live on a closed box [0, L_1] x ... x
[0, L_d] with d in {1, 2}.  Axis a carries n_a >= 4 equally spaced nodes at
i * h_a, h_a = L_a / (n_a - 1); the outermost layer of nodes is the
Dirichlet boundary and solution fields vanish there.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

__all__ = [
    "Grid",
    "DistanceField",
    "Subdomain",
    "build_grid",
    "boundary_distance",
    "carve_subdomain",
]

# Slack used when comparing node distances against a requested margin, so a
# node nominally on the cut survives rounding of i * h.
_MARGIN_SLACK = 1e-12


@dataclass(frozen=True)
class Grid:
    """Tensor-product grid on a box, boundary nodes included.

    Parameters
    ----------
    extents : tuple of float
        Side lengths (L_1, ..., L_d), all positive.
    points : tuple of int
        Nodes per axis (n_1, ..., n_d), each at least 4.
    """

    extents: tuple[float, ...]
    points: tuple[int, ...]

    @property
    def dim(self) -> int:
        return len(self.points)

    @property
    def shape(self) -> tuple[int, ...]:
        return self.points

    @property
    def spacing(self) -> tuple[float, ...]:
        return tuple(L / (n - 1) for L, n in zip(self.extents, self.points))

    @property
    def interior(self) -> tuple[slice, ...]:
        """Index slices selecting the interior nodes."""
        return tuple(slice(1, n - 1) for n in self.points)

    def axis_coords(self, axis: int) -> np.ndarray:
        return np.linspace(0.0, self.extents[axis], self.points[axis])

    def coords(self) -> tuple[np.ndarray, ...]:
        """Nodal coordinate arrays, each of shape ``self.shape``."""
        axes = [self.axis_coords(a) for a in range(self.dim)]
        if self.dim == 1:
            return (axes[0],)
        return tuple(np.meshgrid(*axes, indexing="ij"))

    def interior_mask(self) -> np.ndarray:
        mask = np.zeros(self.shape, dtype=bool)
        mask[self.interior] = True
        return mask

    def boundary_mask(self) -> np.ndarray:
        return ~self.interior_mask()

    def zero_field(self) -> np.ndarray:
        return np.zeros(self.shape)

    @property
    def n_interior(self) -> int:
        return int(np.prod([n - 2 for n in self.points]))

    @property
    def cell_volume(self) -> float:
        return float(np.prod(self.spacing))


@dataclass(frozen=True)
class DistanceField:
    """Distance to the boundary, sampled at the grid nodes."""

    grid: Grid
    values: np.ndarray

    def __post_init__(self) -> None:
        if self.values.shape != self.grid.shape:
            raise ValueError("distance field shape does not match grid")


@dataclass(frozen=True)
class Subdomain:
    """Set of nodes at distance >= margin from the boundary."""

    grid: Grid
    margin: float
    mask: np.ndarray

    @property
    def node_count(self) -> int:
        return int(self.mask.sum())


def build_grid(extents, points) -> Grid:
    """Validate and build a :class:`Grid`.

    Parameters
    ----------
    extents : sequence of float
        Box side lengths, one per axis.
    points : sequence of int
        Nodes per axis, boundary included.
    """
    extents = tuple(float(L) for L in np.atleast_1d(extents))
    points = tuple(int(n) for n in np.atleast_1d(points))
    if len(extents) != len(points):
        raise ValueError("extents and points must have the same length")
    if not 1 <= len(points) <= 2:
        raise ValueError(f"only 1 or 2 spatial dimensions are supported, got {len(points)}")
    if any(L <= 0 for L in extents):
        raise ValueError(f"extents must be positive, got {extents}")
    if any(n < 4 for n in points):
        raise ValueError(f"need at least 4 nodes per axis, got {points}")
    return Grid(extents=extents, points=points)


def boundary_distance(grid: Grid) -> DistanceField:
    """Distance from each node to the boundary of the box.

    For a box the distance is the minimum over axes of min(x_a, L_a - x_a);
    it vanishes exactly on boundary nodes and is positive inside.
    """
    coords = grid.coords()
    per_axis = [np.minimum(x, L - x) for x, L in zip(coords, grid.extents)]
    values = per_axis[0]
    for arr in per_axis[1:]:
        values = np.minimum(values, arr)
    # i*h can land an ulp below 0 after the subtraction; distances are >= 0.
    values = np.maximum(values, 0.0)
    return DistanceField(grid=grid, values=values)


def carve_subdomain(grid: Grid, margin: float) -> Subdomain:
    """Select the nodes at distance at least ``margin`` from the boundary.

    The margin must be strictly positive and below half the smallest
    extent, so the carved set is strictly inside the box and nonempty in
    the continuum.  Comparison allows slack of a few ulp so that nodes
    nominally on the cut are kept.
    """
    margin = float(margin)
    if not 0 < margin < 0.5 * min(grid.extents):
        raise ValueError(
            f"margin must lie in (0, {0.5 * min(grid.extents):g}), got {margin}"
        )
    rho = boundary_distance(grid)
    slack = _MARGIN_SLACK * max(grid.extents)
    mask = rho.values >= margin - slack
    if not mask.any():
        raise ValueError(
            f"margin {margin} leaves no nodes inside the box with extents {grid.extents}"
        )
    return Subdomain(grid=grid, margin=margin, mask=mask)
