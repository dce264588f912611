"""Finite-difference stencils shared across modules.

Two families live here.  ``centered_diff`` and ``forward_diff`` are the
conventions the operators and norms are built on: centered differences with
zero extension outside the box (consistent with Dirichlet fields extended by
zero), and forward differences at cell midpoints for the flux form.
``axis_derivative`` provides derivatives up to third order with one-sided
stencils at the edges, for fields that need not vanish on the boundary
(coefficients, weighted-norm integrands).
"""

from __future__ import annotations

import numpy as np

__all__ = [
    "shift_nodes",
    "centered_diff",
    "forward_diff",
    "axis_derivative",
    "derivative_multi",
    "multi_indices",
]


def shift_nodes(u: np.ndarray, axis: int, offset: int) -> np.ndarray:
    """Shifted copy of ``u`` along ``axis``, zero-filled outside the array."""
    out = np.zeros_like(u)
    n = u.shape[axis]
    if abs(offset) >= n:
        return out
    src = [slice(None)] * u.ndim
    dst = [slice(None)] * u.ndim
    if offset >= 0:
        src[axis] = slice(offset, n)
        dst[axis] = slice(0, n - offset)
    else:
        src[axis] = slice(0, n + offset)
        dst[axis] = slice(-offset, n)
    out[tuple(dst)] = u[tuple(src)]
    return out


def centered_diff(u: np.ndarray, h: float, axis: int = 0) -> np.ndarray:
    """Centered first difference (u(x+h) - u(x-h)) / 2h with zero extension.

    The zero extension matches fields that vanish on (and beyond) the
    boundary, and makes the operator exactly antisymmetric under the
    uniform-weight nodal inner product.
    """
    return (shift_nodes(u, axis, +1) - shift_nodes(u, axis, -1)) / (2.0 * h)


def forward_diff(u: np.ndarray, h: float, axis: int = 0) -> np.ndarray:
    """Forward difference at cell midpoints; length n-1 along ``axis``."""
    lead = [slice(None)] * u.ndim
    lag = [slice(None)] * u.ndim
    lead[axis] = slice(1, None)
    lag[axis] = slice(None, -1)
    return (u[tuple(lead)] - u[tuple(lag)]) / h


def _slice_axis(ndim: int, axis: int, sl: slice) -> tuple:
    out = [slice(None)] * ndim
    out[axis] = sl
    return tuple(out)


def axis_derivative(u: np.ndarray, h: float, axis: int = 0, order: int = 1) -> np.ndarray:
    """Derivative of ``u`` along ``axis`` of the given order (1, 2 or 3).

    Centered stencils in the interior, one-sided at the edges.  Orders 1 and
    2 are second-order accurate everywhere; order 3 falls back to first-order
    one-sided stencils on the two outermost layers.
    """
    if order == 1:
        return np.gradient(u, h, axis=axis, edge_order=2)
    n = u.shape[axis]
    sl = lambda s: _slice_axis(u.ndim, axis, s)  # noqa: E731
    out = np.empty_like(u)
    if order == 2:
        if n < 4:
            raise ValueError("need at least 4 nodes along the axis for a second derivative")
        out[sl(slice(1, -1))] = (u[sl(slice(2, None))] - 2.0 * u[sl(slice(1, -1))] + u[sl(slice(None, -2))]) / h**2
        out[sl(slice(0, 1))] = (
            2.0 * u[sl(slice(0, 1))] - 5.0 * u[sl(slice(1, 2))] + 4.0 * u[sl(slice(2, 3))] - u[sl(slice(3, 4))]
        ) / h**2
        out[sl(slice(-1, None))] = (
            2.0 * u[sl(slice(-1, None))] - 5.0 * u[sl(slice(-2, -1))] + 4.0 * u[sl(slice(-3, -2))] - u[sl(slice(-4, -3))]
        ) / h**2
        return out
    if order == 3:
        if n < 5:
            raise ValueError("need at least 5 nodes along the axis for a third derivative")
        out[sl(slice(2, -2))] = (
            -u[sl(slice(None, -4))] + 2.0 * u[sl(slice(1, -3))] - 2.0 * u[sl(slice(3, -1))] + u[sl(slice(4, None))]
        ) / (2.0 * h**3)
        fwd = (u[sl(slice(3, 5))] - 3.0 * u[sl(slice(2, 4))] + 3.0 * u[sl(slice(1, 3))] - u[sl(slice(0, 2))]) / h**3
        out[sl(slice(0, 2))] = fwd
        bwd = (u[sl(slice(-2, None))] - 3.0 * u[sl(slice(-3, -1))] + 3.0 * u[sl(slice(-4, -2))] - u[sl(slice(-5, -3))]) / h**3
        out[sl(slice(-2, None))] = bwd
        return out
    raise ValueError(f"derivative order must be 1, 2 or 3, got {order}")


def derivative_multi(u: np.ndarray, spacing: tuple[float, ...], gamma: tuple[int, ...]) -> np.ndarray:
    """Mixed partial D^gamma u, applying axis derivatives in axis order."""
    if len(gamma) != u.ndim:
        raise ValueError("multi-index length must match field dimension")
    out = u
    for axis, order in enumerate(gamma):
        if order == 0:
            continue
        out = axis_derivative(out, spacing[axis], axis=axis, order=order)
    return out


def multi_indices(dim: int, total: int) -> list[tuple[int, ...]]:
    """All multi-indices of the given total order, lexicographic."""
    if dim == 1:
        return [(total,)]
    return [(i, total - i) for i in range(total, -1, -1)]
