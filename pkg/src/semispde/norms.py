"""Discrete norms: L^p, Sobolev, weighted Sobolev, shifts and quotients.

Quadrature is the tensor-product cell rule: every node owns a cell of
volume prod h_a, halved per axis on the boundary faces, so integrating a
field that vanishes on the boundary reduces to the interior sum with full
cell volumes.  Region sums (subdomains) use the same rule per contiguous
run of nodes, which reproduces box integrals up to O(h^2).

Weighted norms follow the convention

    |u|_{H^{n,q}_theta}^q = sum_{|gamma| <= n} int |D^gamma u|^q
                              rho(x)^{theta - d + |gamma| q} dx,

with rho the boundary distance; the usable window is q >= 2 and
d - 2 + q < theta < d - 1 + q, checked with a warning rather than an error.
"""

from __future__ import annotations

import warnings
from dataclasses import dataclass

import numpy as np

from semispde import fd
from semispde.geometry import DistanceField, Grid, Subdomain, boundary_distance

__all__ = [
    "WeightedNormSpec",
    "quadrature_weights",
    "region_weights",
    "lp_norm",
    "h1_seminorm_sq",
    "gradient_power_integrand",
    "gradient_weighted_integral",
    "space_time_lp_pow",
    "sobolev_norm",
    "shift",
    "difference_quotient",
    "theta_window",
    "mid_theta",
    "weighted_norm",
    "weighted_norm_from_spec",
    "weighted_equivalence_check",
]


def quadrature_weights(grid: Grid) -> np.ndarray:
    """Cell volumes per node; boundary faces carry half cells."""
    out = np.ones(grid.shape)
    for axis, (h, n) in enumerate(zip(grid.spacing, grid.points)):
        w = np.full(n, h)
        w[0] = w[-1] = 0.5 * h
        shape = [1] * grid.dim
        shape[axis] = n
        out = out * w.reshape(shape)
    return out


def region_weights(grid: Grid, mask: np.ndarray) -> np.ndarray:
    """Cell volumes for a node set: ends of each run carry half cells.

    For the box-shaped subdomains produced by carving at a margin this is
    the tensor trapezoid rule on the sub-box.  Isolated nodes (runs of
    length one) keep half a cell so degenerate regions still have volume.
    """
    if mask.shape != grid.shape:
        raise ValueError("mask shape does not match grid")
    out = np.ones(grid.shape)
    for axis, h in enumerate(grid.spacing):
        pad = [(0, 0)] * grid.dim
        pad[axis] = (1, 1)
        padded = np.pad(mask, pad, constant_values=False)
        lead = [slice(None)] * grid.dim
        lag = [slice(None)] * grid.dim
        lead[axis] = slice(2, None)
        lag[axis] = slice(None, -2)
        has_next = padded[tuple(lead)]
        has_prev = padded[tuple(lag)]
        w = 0.5 * h * (has_prev.astype(float) + has_next.astype(float))
        w = np.maximum(w, 0.5 * h)
        out = out * w
    return np.where(mask, out, 0.0)


def lp_norm(u: np.ndarray, grid: Grid, p: float) -> float:
    """Discrete L^p norm over the box."""
    if p <= 0:
        raise ValueError(f"p must be positive, got {p}")
    w = quadrature_weights(grid)
    return float(np.sum(w * np.abs(u) ** p) ** (1.0 / p))


def h1_seminorm_sq(u: np.ndarray, grid: Grid) -> float:
    """Squared H^1_0 seminorm from midpoint forward differences.

    Matches the flux-form discretization: for pure diffusion with a = I,
    2 <L u, u> = -2 * h1_seminorm_sq(u) exactly.
    """
    vol = grid.cell_volume
    total = 0.0
    for axis, h in enumerate(grid.spacing):
        total += float(np.sum(fd.forward_diff(u, h, axis=axis) ** 2)) * vol
    return total


def gradient_power_integrand(u: np.ndarray, grid: Grid, p: float) -> float:
    """Spatial integral of |grad u|^2 |u|^(p-2), centered gradient."""
    if p < 2:
        raise ValueError(f"p must be at least 2, got {p}")
    w = quadrature_weights(grid)
    grad_sq = np.zeros(grid.shape)
    for axis, h in enumerate(grid.spacing):
        grad_sq += fd.centered_diff(u, h, axis=axis) ** 2
    return float(np.sum(w * grad_sq * np.abs(u) ** (p - 2.0)))


def gradient_weighted_integral(snapshots: np.ndarray, times: np.ndarray, grid: Grid, p: float) -> float:
    """Time integral of the gradient power integrand over the snapshots."""
    values = np.array([gradient_power_integrand(u, grid, p) for u in snapshots])
    return float(np.trapezoid(values, times))


def space_time_lp_pow(values: np.ndarray, times: np.ndarray, grid: Grid, p: float) -> float:
    """int_0^T |v_t|_{L^p}^p dt for fields sampled at the given times."""
    w = quadrature_weights(grid)
    per_time = np.array([float(np.sum(w * np.abs(v) ** p)) for v in values])
    return float(np.trapezoid(per_time, times))


def sobolev_norm(u: np.ndarray, grid: Grid, order: int, region: Subdomain | None = None) -> float:
    """Sobolev norm (sum of squared L^2 norms of D^gamma u, |gamma| <= order).

    Derivatives are centered in the interior with one-sided stencils at the
    box edges, so the field need not vanish on the boundary.  With a region
    the sums run over the region's nodes with run-trapezoid cell volumes.
    """
    if not 0 <= order <= 3:
        raise ValueError(f"order must lie in 0..3, got {order}")
    if region is None:
        w = quadrature_weights(grid)
    else:
        w = region_weights(grid, region.mask)
    total = 0.0
    for k in range(order + 1):
        for gamma in fd.multi_indices(grid.dim, k):
            d = fd.derivative_multi(u, grid.spacing, gamma)
            total += float(np.sum(w * d**2))
    return float(np.sqrt(total))


def shift(u: np.ndarray, grid: Grid, axis: int, steps: int) -> np.ndarray:
    """Shifted field u(x + steps * h e_axis), zero outside the box."""
    if not 0 <= axis < grid.dim:
        raise ValueError(f"axis {axis} outside grid dimension {grid.dim}")
    return fd.shift_nodes(u, axis, steps)


def difference_quotient(u: np.ndarray, grid: Grid, axis: int, steps: int = 1) -> np.ndarray:
    """(u(x + steps h e_axis) - u(x)) / (steps h), zero-extended."""
    if steps == 0:
        raise ValueError("steps must be nonzero")
    h = steps * grid.spacing[axis]
    return (shift(u, grid, axis, steps) - u) / h


def theta_window(dim: int, q: float) -> tuple[float, float]:
    """Open window of usable weight powers for the given dimension and q."""
    return (dim - 2.0 + q, dim - 1.0 + q)


def mid_theta(dim: int, q: float) -> float:
    return dim - 1.5 + q


def _warn_outside_window(dim: int, q: float, theta: float) -> None:
    lo, hi = theta_window(dim, q)
    if q < 2:
        warnings.warn(f"weighted norms expect q >= 2, got q={q}", stacklevel=3)
    if not lo < theta < hi:
        warnings.warn(
            f"theta={theta} outside the window ({lo}, {hi}) for d={dim}, q={q}; "
            "the norm is still computed",
            stacklevel=3,
        )


@dataclass(frozen=True)
class WeightedNormSpec:
    """Parameters of a boundary-weighted Sobolev norm |.|_{H^{order,q}_theta}.

    The optional distance field lets callers reuse a precomputed rho; when
    absent the norm recomputes it from the grid.
    """

    order: int
    q: float
    theta: float
    distance: DistanceField | None = None

    def __post_init__(self) -> None:
        if not 0 <= self.order <= 3:
            raise ValueError(f"order must lie in 0..3, got {self.order}")
        if self.q <= 0:
            raise ValueError(f"q must be positive, got {self.q}")

    def window(self, dim: int) -> tuple[float, float]:
        return theta_window(dim, self.q)

    def in_window(self, dim: int) -> bool:
        lo, hi = self.window(dim)
        return self.q >= 2 and lo < self.theta < hi


def weighted_norm_from_spec(u: np.ndarray, grid: Grid, spec: WeightedNormSpec) -> float:
    rho = spec.distance.values if spec.distance is not None else None
    return weighted_norm(u, grid, spec.q, spec.theta, order=spec.order, rho=rho)


def weighted_norm(
    u: np.ndarray,
    grid: Grid,
    q: float,
    theta: float,
    order: int = 0,
    rho: np.ndarray | None = None,
) -> float:
    """Weighted Sobolev norm |u|_{H^{order,q}_theta} with boundary-distance weight.

    The sum over nodes is restricted to the interior: in-window weights
    vanish on the boundary anyway, and the restriction keeps out-of-window
    powers finite.
    """
    if not 0 <= order <= 3:
        raise ValueError(f"order must lie in 0..3, got {order}")
    _warn_outside_window(grid.dim, q, theta)
    if rho is None:
        rho = boundary_distance(grid).values
    w = quadrature_weights(grid)
    inner = grid.interior_mask()
    d = grid.dim
    total = 0.0
    for k in range(order + 1):
        weight = rho[inner] ** (theta - d + k * q) * w[inner]
        for gamma in fd.multi_indices(d, k):
            der = fd.derivative_multi(u, grid.spacing, gamma)
            total += float(np.sum(np.abs(der[inner]) ** q * weight))
    return float(total ** (1.0 / q))


def weighted_equivalence_check(
    u: np.ndarray,
    grid: Grid,
    q: float,
    theta: float,
    order: int,
    rho: np.ndarray | None = None,
) -> dict:
    """Compare |u|_{H^{n,q}_theta} against |u|_{H^{n-1,q}_theta} plus
    the same norm of the weighted gradient rho * du/dx_i.

    The two sides are equivalent norms; the report records both and their
    ratio, which should sit inside a fixed band under mesh refinement.
    """
    if order < 1:
        raise ValueError("equivalence needs order >= 1")
    if rho is None:
        rho = boundary_distance(grid).values
    lhs = weighted_norm(u, grid, q, theta, order, rho)
    rhs = weighted_norm(u, grid, q, theta, order - 1, rho)
    for axis in range(grid.dim):
        du = fd.axis_derivative(u, grid.spacing[axis], axis=axis, order=1)
        rhs += weighted_norm(rho * du, grid, q, theta, order - 1, rho)
    ratio = lhs / rhs if rhs > 0 else float("inf") if lhs > 0 else 1.0
    return {"lhs": lhs, "rhs": rhs, "ratio": float(ratio), "order": order, "theta": theta, "q": q}
