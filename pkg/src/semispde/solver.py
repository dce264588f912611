"""Semi-implicit time stepping for the semilinear stochastic PDE.

One step of the default scheme advances u by

    (I - dt L_{t+dt}) u_next = u + dt (f(t, x, u, grad u) + f0(t))
                               + sum_k (M^k u + g^k(t)) dW^k,

with the noise evaluated explicitly at the step start (Ito convention) and
the linear drift absorbed implicitly.  Dirichlet values stay pinned at zero:
only interior nodes are unknowns.  In one dimension the system is
tridiagonal and solved by banded elimination; in two dimensions it is a
sparse system solved by diagonally preconditioned CG, falling back to
BiCGStab when first-order terms make the matrix nonsymmetric.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np
import scipy.linalg
import scipy.sparse
import scipy.sparse.linalg

from semispde import fd, norms
from semispde.coefficients import CoefficientSet, ForcingSet, apply_L
from semispde.geometry import Grid
from semispde.noise import NoisePath
from semispde.semilinear import SemilinearTerm, truncate

__all__ = [
    "SolverConfig",
    "Trajectory",
    "SolverError",
    "BlowUpError",
    "LinearSolveError",
    "solve_trajectory",
    "solve_truncated_family",
    "assemble_system",
]


class SolverError(RuntimeError):
    """Numerical failure during time stepping."""


class BlowUpError(SolverError):
    def __init__(self, step: int, time: float, sup: float, threshold: float):
        super().__init__(
            f"solution exceeded the blow-up guard at step {step} (t={time:.6g}): "
            f"sup |u| = {sup:.3e} > {threshold:.3e}"
        )
        self.step = step
        self.time = time
        self.sup = sup


class LinearSolveError(SolverError):
    def __init__(self, step: int, info: int, residual: float, tol: float):
        super().__init__(
            f"iterative linear solve failed at step {step}: info={info}, "
            f"relative residual {residual:.3e} (tolerance {tol:.1e})"
        )
        self.step = step
        self.info = info
        self.residual = residual


@dataclass(frozen=True)
class SolverConfig:
    """Time-stepping parameters.

    ``track_p`` switches on the running statistics the moment estimators
    need: the sup over all step times of the L^p norm to the p-th power and
    the accumulated time integral of |grad u|^2 |u|^(p-2).
    """

    dt: float
    t_final: float
    scheme: str = "semi_implicit"
    snapshot_stride: int = 1
    track_p: float | None = None
    linear_tol: float = 1e-10
    linear_maxiter: int = 2000
    blowup_threshold: float = 1e8

    def __post_init__(self) -> None:
        if self.dt <= 0 or self.t_final <= 0:
            raise ValueError("dt and t_final must be positive")
        if self.scheme not in ("semi_implicit", "explicit"):
            raise ValueError(f"unknown scheme {self.scheme!r}")
        if self.snapshot_stride < 1:
            raise ValueError("snapshot_stride must be at least 1")
        if self.track_p is not None and self.track_p < 2:
            raise ValueError("track_p must be at least 2")

    @property
    def steps(self) -> int:
        steps = int(round(self.t_final / self.dt))
        if steps < 1 or abs(steps * self.dt - self.t_final) > 1e-9 * self.t_final:
            raise ValueError(f"t_final={self.t_final} is not an integer multiple of dt={self.dt}")
        return steps


@dataclass(frozen=True)
class Trajectory:
    """Discrete solution path with the statistics tracked along the way."""

    grid: Grid
    dt: float
    times: np.ndarray  # snapshot times
    snapshots: np.ndarray  # (len(times), *grid.shape)
    sup_lp_pow: float | None = None
    gradient_integral: float | None = None
    tracked_p: float | None = None
    seed: int = 0
    stream: int = 0
    noise_level: int = 0

    @property
    def final(self) -> np.ndarray:
        return self.snapshots[-1]

    def snapshot_at(self, t: float) -> np.ndarray:
        idx = int(np.argmin(np.abs(self.times - t)))
        if abs(self.times[idx] - t) > 1e-9 * max(1.0, abs(t)):
            raise KeyError(f"no snapshot at t={t}")
        return self.snapshots[idx]


def _banded_system(a: np.ndarray, b: np.ndarray, c: np.ndarray, grid: Grid, dt: float):
    """Tridiagonal I - dt L in solve_banded layout, d = 1."""
    h = grid.spacing[0]
    amid = 0.5 * (a[:-1] + a[1:])
    am = amid[:-1]  # a_{i-1/2} for interior i = 1..n-2
    ap = amid[1:]  # a_{i+1/2}
    bi = b[1:-1]
    ci = c[1:-1]
    diag = 1.0 + dt * ((am + ap) / h**2 - ci)
    lower = -dt * (am / h**2 - bi / (2.0 * h))
    upper = -dt * (ap / h**2 + bi / (2.0 * h))
    n = diag.size
    ab = np.zeros((3, n))
    ab[1] = diag
    ab[0, 1:] = upper[:-1]
    ab[2, :-1] = lower[1:]
    return ab


def assemble_system(coeffs: CoefficientSet, grid: Grid, t: float, dt: float):
    """Assemble I - dt L over the interior unknowns.

    Returns ``("banded", ab)`` in one dimension and ``("sparse", A, sym)``
    in two, where ``sym`` says whether the matrix is numerically symmetric
    (choosing CG over BiCGStab).  The sparse stencil matches
    :func:`semispde.coefficients.apply_L` exactly on zero-boundary fields.
    """
    a = coeffs.a_field(t, grid)
    b = coeffs.b_field(t, grid)
    c = coeffs.c_field(t, grid)
    if grid.dim == 1:
        return ("banded", _banded_system(a[0, 0], b[0], c, grid, dt))

    nx, ny = grid.points
    hx, hy = grid.spacing
    ix = np.arange(1, nx - 1)
    iy = np.arange(1, ny - 1)
    II, JJ = np.meshgrid(ix, iy, indexing="ij")
    II = II.ravel()
    JJ = JJ.ravel()

    def idx(i, j):
        return (i - 1) * (ny - 2) + (j - 1)

    rows, cols, vals = [], [], []

    def add(i, j, coeff):
        # drop couplings to boundary nodes: their values are zero
        keep = (i >= 1) & (i <= nx - 2) & (j >= 1) & (j <= ny - 2) & (coeff != 0.0)
        rows.append(idx(II, JJ)[keep])
        cols.append(idx(i, j)[keep])
        vals.append(coeff[keep])

    amid_x = 0.5 * (a[0, 0][:-1, :] + a[0, 0][1:, :])  # at (i+1/2, j)
    amid_y = 0.5 * (a[1, 1][:, :-1] + a[1, 1][:, 1:])
    am_x = amid_x[II - 1, JJ]
    ap_x = amid_x[II, JJ]
    am_y = amid_y[II, JJ - 1]
    ap_y = amid_y[II, JJ]
    b1 = b[0][II, JJ]
    b2 = b[1][II, JJ]
    cc = c[II, JJ]

    add(II, JJ, -((am_x + ap_x) / hx**2 + (am_y + ap_y) / hy**2) + cc)
    add(II - 1, JJ, am_x / hx**2 - b1 / (2.0 * hx))
    add(II + 1, JJ, ap_x / hx**2 + b1 / (2.0 * hx))
    add(II, JJ - 1, am_y / hy**2 - b2 / (2.0 * hy))
    add(II, JJ + 1, ap_y / hy**2 + b2 / (2.0 * hy))

    cross = hx * hy * 4.0
    a12_up = a[0, 1][II, JJ + 1]
    a12_dn = a[0, 1][II, JJ - 1]
    a21_rt = a[1, 0][II + 1, JJ]
    a21_lf = a[1, 0][II - 1, JJ]
    add(II + 1, JJ + 1, a12_up / cross + a21_rt / cross)
    add(II - 1, JJ + 1, -a12_up / cross - a21_lf / cross)
    add(II + 1, JJ - 1, -a12_dn / cross - a21_rt / cross)
    add(II - 1, JJ - 1, a12_dn / cross + a21_lf / cross)

    n_unknown = (nx - 2) * (ny - 2)
    L = scipy.sparse.csr_matrix(
        (np.concatenate(vals), (np.concatenate(rows), np.concatenate(cols))),
        shape=(n_unknown, n_unknown),
    )
    A = (scipy.sparse.identity(n_unknown, format="csr") - dt * L).tocsr()
    gap = A - A.T
    sym = bool(np.abs(gap.data).max() <= 1e-12 * np.abs(A.data).max()) if gap.nnz else True
    return ("sparse", A, sym)


def _solve_linear(system, rhs_int: np.ndarray, x0: np.ndarray, config: SolverConfig, step: int):
    if system[0] == "banded":
        return scipy.linalg.solve_banded((1, 1), system[1], rhs_int)
    _, A, sym = system
    precond = scipy.sparse.diags(1.0 / A.diagonal())
    solver = scipy.sparse.linalg.cg if sym else scipy.sparse.linalg.bicgstab
    x, info = solver(A, rhs_int, x0=x0, rtol=config.linear_tol, atol=0.0, M=precond, maxiter=config.linear_maxiter)
    if info != 0:
        res = float(np.linalg.norm(A @ x - rhs_int) / max(np.linalg.norm(rhs_int), 1e-300))
        raise LinearSolveError(step, int(info), res, config.linear_tol)
    return x


def solve_trajectory(
    grid: Grid,
    coeffs: CoefficientSet,
    forcing: ForcingSet,
    term: SemilinearTerm,
    initial: np.ndarray,
    noise: NoisePath,
    config: SolverConfig,
) -> Trajectory:
    """Integrate one trajectory driven by the given noise path.

    The path must be sampled at the solver step size and cover the horizon.
    Snapshots are stored every ``snapshot_stride`` steps plus the final
    state; running statistics (when ``track_p`` is set) cover every step
    regardless of the stride.
    """
    steps = config.steps
    if initial.shape != grid.shape:
        raise ValueError("initial condition shape does not match grid")
    if not (coeffs.modes == forcing.modes == noise.modes):
        raise ValueError(
            f"mode mismatch: coefficients {coeffs.modes}, forcing {forcing.modes}, noise {noise.modes}"
        )
    if abs(noise.dt - config.dt) > 1e-9 * config.dt:
        raise ValueError(f"noise step {noise.dt} does not match solver step {config.dt}")
    if noise.steps < steps:
        raise ValueError(f"noise path covers {noise.steps} steps, solver needs {steps}")

    u = np.array(initial, dtype=float)
    bmask = grid.boundary_mask()
    interior_scale = float(np.max(np.abs(u[~bmask]))) if u.size else 0.0
    if float(np.max(np.abs(u[bmask]))) > 1e-6 * max(1.0, interior_scale):
        raise ValueError("initial condition does not vanish on the boundary")
    u[bmask] = 0.0

    coords = grid.coords()
    inner = grid.interior
    dt = config.dt
    track = config.track_p is not None
    p = config.track_p
    qw = norms.quadrature_weights(grid) if track else None

    static_coeffs = not coeffs.time_dependent
    static_forcing = not forcing.time_dependent
    system = assemble_system(coeffs, grid, dt, dt) if (config.scheme == "semi_implicit" and static_coeffs) else None
    sigma = coeffs.sigma_field(0.0, grid) if static_coeffs else None
    mu = coeffs.mu_field(0.0, grid) if static_coeffs else None
    f0 = forcing.f0_field(0.0, grid) if static_forcing else None
    g = forcing.g_field(0.0, grid) if static_forcing else None

    def lp_pow(field):
        return float(np.sum(qw * np.abs(field) ** p))

    def grad_of(field):
        return np.stack([fd.centered_diff(field, grid.spacing[i], axis=i) for i in range(grid.dim)])

    snap_idx = [0]
    snaps = [u.copy()]
    sup_pow = lp_pow(u) if track else None
    grad_series = []

    for k in range(steps):
        t = k * dt
        grad = grad_of(u)
        if track:
            grad_series.append(float(np.sum(qw * np.sum(grad**2, axis=0) * np.abs(u) ** (p - 2.0))))

        sig = sigma if static_coeffs else coeffs.sigma_field(t, grid)
        muf = mu if static_coeffs else coeffs.mu_field(t, grid)
        f0f = f0 if static_forcing else forcing.f0_field(t, grid)
        gf = g if static_forcing else forcing.g_field(t, grid)
        dw = noise.increments[k]

        fval = term(t, coords, u, tuple(grad))
        sig_dw = np.einsum("ik...,k->i...", sig, dw)
        noise_field = np.einsum("i...,i...->...", sig_dw, grad)
        noise_field += np.einsum("k...,k->...", muf, dw) * u
        noise_field += np.einsum("k...,k->...", gf, dw)

        rhs = u + dt * (fval + f0f) + noise_field
        if config.scheme == "explicit":
            u_new = rhs + dt * apply_L(u, coeffs, grid, t)
            u_new[bmask] = 0.0
        else:
            sys_k = system if system is not None else assemble_system(coeffs, grid, t + dt, dt)
            x = _solve_linear(sys_k, rhs[inner].ravel(), u[inner].ravel(), config, k)
            u_new = grid.zero_field()
            u_new[inner] = x.reshape([n - 2 for n in grid.points])

        sup_now = float(np.max(np.abs(u_new)))
        if not np.isfinite(sup_now) or sup_now > config.blowup_threshold:
            raise BlowUpError(k + 1, (k + 1) * dt, sup_now, config.blowup_threshold)

        u = u_new
        if track:
            sup_pow = max(sup_pow, lp_pow(u))
        if (k + 1) % config.snapshot_stride == 0 or k + 1 == steps:
            snap_idx.append(k + 1)
            snaps.append(u.copy())

    grad_integral = None
    if track:
        grad_series.append(float(np.sum(qw * np.sum(grad_of(u) ** 2, axis=0) * np.abs(u) ** (p - 2.0))))
        grad_integral = float(np.trapezoid(np.asarray(grad_series), dx=dt))

    times = np.asarray(snap_idx, dtype=float) * dt
    return Trajectory(
        grid=grid,
        dt=dt,
        times=times,
        snapshots=np.asarray(snaps),
        sup_lp_pow=sup_pow,
        gradient_integral=grad_integral,
        tracked_p=p,
        seed=noise.seed,
        stream=noise.stream,
        noise_level=noise.level,
    )


def solve_truncated_family(
    grid: Grid,
    coeffs: CoefficientSet,
    forcing: ForcingSet,
    term: SemilinearTerm,
    initial: np.ndarray,
    noise: NoisePath,
    config: SolverConfig,
    m_values,
    include_reference: bool = True,
) -> dict:
    """Solve the truncated equations for each clamp level over shared noise.

    Returns a dict mapping each m to its trajectory; the key ``None`` holds
    the untruncated reference when requested.  All runs consume the same
    noise path, so truncation levels that never clamp reproduce the
    reference bitwise.
    """
    out = {}
    if include_reference:
        out[None] = solve_trajectory(grid, coeffs, forcing, term, initial, noise, config)
    for m in m_values:
        out[float(m)] = solve_trajectory(grid, coeffs, forcing, truncate(term, m), initial, noise, config)
    return out
