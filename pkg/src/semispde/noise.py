"""Brownian increments from a counter-based generator, with bridge refinement.

Increments are a pure function of (seed, stream, step, mode): each path is
generated by a Philox counter-based generator keyed by (seed, stream,
purpose), and the (step, mode) pair indexes the resulting array.  Distinct
trajectories use distinct streams, so Monte Carlo runs are order-independent
and parallel-safe without shared generator state.

Purpose 0 is the base path.  Purpose r >= 1 keys the midpoint displacements
of the r-th Brownian bridge halving, so a refined path is again a pure
function of (seed, stream) and the number of rounds, and the fine increments
sum back to the coarse ones by construction.  Purposes at AUX_PURPOSE and
above are reserved for auxiliary draws (sampling-time selection and the
like) so they can never collide with bridge rounds.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

__all__ = ["NoisePath", "sample_path", "brownian_bridge_refine", "generator", "AUX_PURPOSE"]

_STREAM_BITS = 48
_PURPOSE_BITS = 16
_MAX_STREAM = 1 << _STREAM_BITS
_MAX_PURPOSE = 1 << _PURPOSE_BITS

# First purpose value never used by bridge refinement (bridge rounds would
# need 2^15 halvings to reach it).
AUX_PURPOSE = 1 << 15


def _philox_key(seed: int, stream: int, purpose: int) -> np.ndarray:
    """128-bit Philox key; injective in (seed mod 2^64, stream, purpose)."""
    if not 0 <= stream < _MAX_STREAM:
        raise ValueError(f"stream must lie in [0, 2^{_STREAM_BITS}), got {stream}")
    if not 0 <= purpose < _MAX_PURPOSE:
        raise ValueError(f"purpose must lie in [0, 2^{_PURPOSE_BITS}), got {purpose}")
    lo = np.uint64(int(seed) % (1 << 64))
    hi = np.uint64((stream << _PURPOSE_BITS) | purpose)
    return np.array([lo, hi], dtype=np.uint64)


def generator(seed: int, stream: int, purpose: int) -> np.random.Generator:
    """Counter-based generator for the given key; same key, same draws."""
    return np.random.Generator(np.random.Philox(key=_philox_key(seed, stream, purpose)))


def _normals(seed: int, stream: int, purpose: int, shape: tuple[int, ...]) -> np.ndarray:
    return generator(seed, stream, purpose).standard_normal(shape)


@dataclass(frozen=True)
class NoisePath:
    """Increments of a K-mode Brownian motion on a uniform time grid.

    ``increments[k, j]`` is W^j(t_{k+1}) - W^j(t_k) with t_k = k * dt.
    ``level`` counts the bridge halvings applied since the base draw.
    """

    dt: float
    increments: np.ndarray  # shape (steps, modes)
    seed: int
    stream: int
    level: int = 0

    @property
    def steps(self) -> int:
        return self.increments.shape[0]

    @property
    def modes(self) -> int:
        return self.increments.shape[1]

    @property
    def duration(self) -> float:
        return self.steps * self.dt

    def cumulative(self) -> np.ndarray:
        """W at the step boundaries, shape (steps + 1, modes), W(0) = 0."""
        out = np.zeros((self.steps + 1, self.modes))
        np.cumsum(self.increments, axis=0, out=out[1:])
        return out


def sample_path(steps: int, modes: int, dt: float, seed: int, stream: int = 0) -> NoisePath:
    """Draw a base path of independent N(0, dt) increments.

    Deterministic in (seed, stream): the same key always yields the same
    array, independent of call order or other streams.
    """
    if steps < 1:
        raise ValueError(f"steps must be positive, got {steps}")
    if modes < 0:
        raise ValueError(f"modes must be nonnegative, got {modes}")
    if dt <= 0:
        raise ValueError(f"dt must be positive, got {dt}")
    inc = _normals(seed, stream, 0, (steps, modes)) * np.sqrt(dt)
    return NoisePath(dt=float(dt), increments=inc, seed=int(seed), stream=int(stream), level=0)


def brownian_bridge_refine(path: NoisePath, factor: int = 2) -> NoisePath:
    """Refine a path by a power-of-two factor via Brownian bridge halvings.

    Each halving splits an increment dW over an interval of length dt into

        dW/2 + xi  and  dW/2 - xi,   xi ~ N(0, dt/4) independent,

    which reproduces the joint law of the two half-increments and keeps
    their sum equal to dW up to one rounding error.  The displacements xi
    for round r are drawn under purpose key r, so refining by 4 equals
    refining by 2 twice, and coupled coarse/fine pairs share their base
    randomness exactly.
    """
    if factor < 1 or factor & (factor - 1):
        raise ValueError(f"refinement factor must be a positive power of two, got {factor}")
    out = path
    while factor > 1:
        level = out.level + 1
        xi = _normals(out.seed, out.stream, level, out.increments.shape) * np.sqrt(out.dt / 4.0)
        half = out.increments / 2.0
        fine = np.empty((2 * out.steps, out.modes))
        fine[0::2] = half + xi
        fine[1::2] = half - xi
        out = NoisePath(dt=out.dt / 2.0, increments=fine, seed=out.seed, stream=out.stream, level=level)
        factor //= 2
    return out
