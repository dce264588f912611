"""Linear operator coefficients, forcing data, and assumption checks.

The drift operator and the noise operators are

    L u = sum_j d_j ( sum_i a^{ij} d_i u ) + sum_i b^i d_i u + c u
    M^k u = sum_i sigma^{ik} d_i u + mu^k u,     k = 0 .. K-1.

Discretely, the divergence-form a-term uses a flux form: forward differences
at cell midpoints with the arithmetic mean of nodal a values, so summation by
parts against the midpoint gradient is exact, not just O(h^2).  Off-diagonal
a entries and the first-order terms use centered differences with zero
extension, which are exactly antisymmetric under the uniform nodal inner
product.  All checks in this module (parabolicity, boundedness, discrete
coercivity) report margins against the declared constants kappa and K.
"""

from __future__ import annotations

import csv
from dataclasses import dataclass, replace
from typing import Callable

import numpy as np

from semispde import fd
from semispde.geometry import Grid

__all__ = [
    "CoefficientSet",
    "ForcingSet",
    "apply_L",
    "apply_M",
    "discrete_energy",
    "sbp_defect",
    "check_parabolicity",
    "check_boundedness",
    "check_discrete_coercivity",
    "coefficients_from_preset",
    "forcing_from_preset",
    "load_sampled_field",
]

# Field evaluators take (t, coords) with coords = grid.coords() and return
# an array broadcastable to the grid shape.
FieldFn = Callable[[float, tuple], np.ndarray]


def _const_field(value: float) -> FieldFn:
    value = float(value)

    def fn(t, coords):
        return np.asarray(value)

    return fn


def _as_field(value) -> FieldFn:
    if callable(value):
        return value
    return _const_field(value)


def _materialize(fn: FieldFn, t: float, coords: tuple, shape: tuple[int, ...]) -> np.ndarray:
    return np.broadcast_to(np.asarray(fn(t, coords), dtype=float), shape)


@dataclass(frozen=True)
class CoefficientSet:
    """Coefficients of L and M with their declared constants.

    ``a``, ``b``, ``sigma`` and ``mu`` are nested tuples of field evaluators
    with shapes (d, d), (d,), (d, K) and (K,).  ``bound_K`` is the declared
    boundedness constant, ``kappa`` the declared parabolicity constant, and
    ``smooth_order`` the number of spatial derivatives the fields possess
    (how far the boundedness check may differentiate).
    """

    dim: int
    modes: int
    a: tuple
    b: tuple
    c: FieldFn
    sigma: tuple
    mu: tuple
    bound_K: float
    kappa: float
    smooth_order: int = 3
    time_dependent: bool = False
    label: str = "custom"

    def a_field(self, t: float, grid: Grid) -> np.ndarray:
        coords = grid.coords()
        out = np.empty((self.dim, self.dim) + grid.shape)
        for i in range(self.dim):
            for j in range(self.dim):
                out[i, j] = _materialize(self.a[i][j], t, coords, grid.shape)
        return out

    def b_field(self, t: float, grid: Grid) -> np.ndarray:
        coords = grid.coords()
        out = np.empty((self.dim,) + grid.shape)
        for i in range(self.dim):
            out[i] = _materialize(self.b[i], t, coords, grid.shape)
        return out

    def c_field(self, t: float, grid: Grid) -> np.ndarray:
        return _materialize(self.c, t, grid.coords(), grid.shape).copy()

    def sigma_field(self, t: float, grid: Grid) -> np.ndarray:
        coords = grid.coords()
        out = np.empty((self.dim, self.modes) + grid.shape)
        for i in range(self.dim):
            for k in range(self.modes):
                out[i, k] = _materialize(self.sigma[i][k], t, coords, grid.shape)
        return out

    def mu_field(self, t: float, grid: Grid) -> np.ndarray:
        coords = grid.coords()
        out = np.empty((self.modes,) + grid.shape)
        for k in range(self.modes):
            out[k] = _materialize(self.mu[k], t, coords, grid.shape)
        return out

    def with_c_shift(self, delta: float) -> "CoefficientSet":
        """Copy with c replaced by c + delta (and the bound enlarged)."""
        base = self.c

        def shifted(t, coords):
            return np.asarray(base(t, coords), dtype=float) + delta

        return replace(self, c=shifted, bound_K=self.bound_K + abs(delta), label=self.label + f"+c{delta:g}")


@dataclass(frozen=True)
class ForcingSet:
    """Free terms: deterministic drift forcing f0 and noise forcing g^k."""

    dim: int
    modes: int
    f0: FieldFn
    g: tuple
    time_dependent: bool = False
    label: str = "custom"

    def f0_field(self, t: float, grid: Grid) -> np.ndarray:
        return _materialize(self.f0, t, grid.coords(), grid.shape).copy()

    def g_field(self, t: float, grid: Grid) -> np.ndarray:
        coords = grid.coords()
        out = np.empty((self.modes,) + grid.shape)
        for k in range(self.modes):
            out[k] = _materialize(self.g[k], t, coords, grid.shape)
        return out

    def with_f0_shift(self, shift: Callable) -> "ForcingSet":
        """Copy with f0 replaced by f0 + shift(t, coords).

        The shift may depend on time, so the copy is conservatively marked
        time dependent (the solver then re-evaluates f0 every step).
        """
        base = self.f0

        def fn(t, coords):
            return np.asarray(base(t, coords), dtype=float) + np.asarray(shift(t, coords), dtype=float)

        return replace(self, f0=fn, time_dependent=True, label=self.label + "+shift")


# ---------------------------------------------------------------------------
# discrete operators


def _a_midpoints(a_jj: np.ndarray, axis: int) -> np.ndarray:
    lead = [slice(None)] * a_jj.ndim
    lag = [slice(None)] * a_jj.ndim
    lead[axis] = slice(1, None)
    lag[axis] = slice(None, -1)
    return 0.5 * (a_jj[tuple(lead)] + a_jj[tuple(lag)])


def _diffusion_part(u: np.ndarray, a: np.ndarray, grid: Grid) -> np.ndarray:
    """Flux-form divergence sum_j d_j(sum_i a^{ij} d_i u), zero boundary rows."""
    d = grid.dim
    h = grid.spacing
    out = np.zeros(grid.shape)
    inner = grid.interior
    for j in range(d):
        # diagonal part: backward difference of the midpoint flux
        amid = _a_midpoints(a[j, j], axis=j)
        flux = amid * fd.forward_diff(u, h[j], axis=j)
        lead = [slice(None)] * d
        lag = [slice(None)] * d
        lead[j] = slice(1, None)
        lag[j] = slice(None, -1)
        div = (flux[tuple(lead)] - flux[tuple(lag)]) / h[j]
        # div covers nodes 1 .. n_j - 2 along axis j, all nodes elsewhere
        take = [slice(None)] * d
        take[j] = slice(1, -1)
        put = [slice(None)] * d
        put[j] = slice(1, -1)
        contrib = np.zeros(grid.shape)
        contrib[tuple(put)] = div
        out += contrib
        # off-diagonal parts: centered differences with zero extension
        for i in range(d):
            if i == j:
                continue
            w = a[i, j] * fd.centered_diff(u, h[i], axis=i)
            out += fd.centered_diff(w, h[j], axis=j)
    mask = np.zeros(grid.shape, dtype=bool)
    mask[inner] = True
    out[~mask] = 0.0
    return out


def apply_L(u: np.ndarray, coeffs: CoefficientSet, grid: Grid, t: float = 0.0) -> np.ndarray:
    """Apply the drift operator L; boundary rows of the result are zero."""
    if u.shape != grid.shape:
        raise ValueError("field shape does not match grid")
    a = coeffs.a_field(t, grid)
    out = _diffusion_part(u, a, grid)
    b = coeffs.b_field(t, grid)
    cc = coeffs.c_field(t, grid)
    lower = np.zeros(grid.shape)
    for i in range(grid.dim):
        lower += b[i] * fd.centered_diff(u, grid.spacing[i], axis=i)
    lower += cc * u
    inner = grid.interior_mask()
    out[inner] += lower[inner]
    return out


def apply_M(u: np.ndarray, coeffs: CoefficientSet, grid: Grid, t: float = 0.0, k: int | None = None) -> np.ndarray:
    """Apply the noise operators M^k u = sigma^{.k} . grad u + mu^k u.

    Returns the stacked array over all modes when ``k`` is None, otherwise
    the single requested mode.  Gradients are centered with zero extension.
    """
    if u.shape != grid.shape:
        raise ValueError("field shape does not match grid")
    if k is not None and not 0 <= k < coeffs.modes:
        raise ValueError(f"mode index {k} outside [0, {coeffs.modes})")
    grad = np.stack([fd.centered_diff(u, grid.spacing[i], axis=i) for i in range(grid.dim)])
    sigma = coeffs.sigma_field(t, grid)
    mu = coeffs.mu_field(t, grid)
    out = np.einsum("ik...,i...->k...", sigma, grad) + mu * u[None]
    if k is None:
        return out
    return out[k]


def discrete_energy(u: np.ndarray, v: np.ndarray, coeffs: CoefficientSet, grid: Grid, t: float = 0.0) -> float:
    """Dirichlet form sum_ij <a^{ij} D_i u, D_j v> in the discrete convention.

    Diagonal terms pair midpoint forward differences against midpoint a
    values; off-diagonal terms pair centered differences at the nodes.  The
    inner products carry the uniform nodal volume (zero extension), matching
    :func:`apply_L` so that <L u, v> = -energy(u, v) exactly when b = c = 0
    and u, v vanish on the boundary.
    """
    a = coeffs.a_field(t, grid)
    h = grid.spacing
    vol = grid.cell_volume
    total = 0.0
    for j in range(grid.dim):
        amid = _a_midpoints(a[j, j], axis=j)
        total += float(np.sum(amid * fd.forward_diff(u, h[j], axis=j) * fd.forward_diff(v, h[j], axis=j))) * vol
        for i in range(grid.dim):
            if i == j:
                continue
            du = fd.centered_diff(u, h[i], axis=i)
            dv = fd.centered_diff(v, h[j], axis=j)
            total += float(np.sum(a[i, j] * du * dv)) * vol
    return total


def sbp_defect(u: np.ndarray, v: np.ndarray, coeffs: CoefficientSet, grid: Grid, t: float = 0.0) -> float:
    """Relative summation-by-parts defect of the diffusion part.

    For zero-boundary u, v the flux-form discretization satisfies
    <(div a grad) u, v> = -sum_ij <a^{ij} D_i u, D_j v> exactly; the
    returned value is the residual relative to the energy magnitude.
    """
    a = coeffs.a_field(t, grid)
    lu = _diffusion_part(u, a, grid)
    lhs = float(np.sum(lu * v)) * grid.cell_volume
    energy = discrete_energy(u, v, coeffs, grid, t)
    scale = max(abs(lhs), abs(energy), 1e-300)
    return abs(lhs + energy) / scale


# ---------------------------------------------------------------------------
# assumption checks


def check_parabolicity(coeffs: CoefficientSet, grid: Grid, times=(0.0,), n_directions: int = 64) -> dict:
    """Worst-case margin of the form xi . (a - sigma sigma^T / 2) xi.

    The margin is the minimum over sampled times and nodes of the smallest
    eigenvalue of the symmetrized form; in d = 2 a sweep over equispaced
    unit directions cross-checks the eigenvalue route.  Passes when the
    margin is at least the declared kappa.
    """
    margin = np.inf
    sweep_margin = np.inf
    for t in times:
        a = coeffs.a_field(t, grid)
        sigma = coeffs.sigma_field(t, grid)
        form = a - 0.5 * np.einsum("ik...,jk...->ij...", sigma, sigma)
        sym = 0.5 * (form + np.swapaxes(form, 0, 1))
        if grid.dim == 1:
            eigmin = sym[0, 0]
            sweep = eigmin
        else:
            tr = 0.5 * (sym[0, 0] + sym[1, 1])
            det_part = np.sqrt((0.5 * (sym[0, 0] - sym[1, 1])) ** 2 + sym[0, 1] ** 2)
            eigmin = tr - det_part
            angles = np.linspace(0.0, np.pi, n_directions, endpoint=False)
            xi = np.stack([np.cos(angles), np.sin(angles)])
            quad = np.einsum("id,ij...,jd->d...", xi, sym, xi)
            sweep = quad.min(axis=0)
        margin = min(margin, float(np.min(eigmin)))
        sweep_margin = min(sweep_margin, float(np.min(sweep)))
    return {
        "margin": margin,
        "direction_sweep_margin": sweep_margin,
        "kappa": coeffs.kappa,
        "times": list(float(t) for t in times),
        "passed": bool(margin >= coeffs.kappa - 1e-12),
    }


def check_boundedness(coeffs: CoefficientSet, grid: Grid, times=(0.0,), order: int | None = None) -> dict:
    """Sup bounds of the coefficients and their derivatives against K.

    For each multi-index with |gamma| <= order the check takes nodal finite
    differences of a, b, c (each bounded by K individually) and accumulates
    the squared sums over sigma and mu (their joint l2 sum over modes,
    components and derivative orders is bounded by K).
    """
    if order is None:
        order = min(coeffs.smooth_order, 3)
    gammas = [g for k in range(order + 1) for g in fd.multi_indices(grid.dim, k)]
    h = grid.spacing
    worst_abc = 0.0
    sum_sigma_mu = 0.0
    for t in times:
        a = coeffs.a_field(t, grid)
        b = coeffs.b_field(t, grid)
        cc = coeffs.c_field(t, grid)
        sigma = coeffs.sigma_field(t, grid)
        mu = coeffs.mu_field(t, grid)
        total = np.zeros(grid.shape)
        for gamma in gammas:
            for i in range(grid.dim):
                for j in range(grid.dim):
                    worst_abc = max(worst_abc, float(np.max(np.abs(fd.derivative_multi(a[i, j], h, gamma)))))
                worst_abc = max(worst_abc, float(np.max(np.abs(fd.derivative_multi(b[i], h, gamma)))))
            worst_abc = max(worst_abc, float(np.max(np.abs(fd.derivative_multi(cc, h, gamma)))))
            for i in range(grid.dim):
                for k in range(coeffs.modes):
                    total += fd.derivative_multi(sigma[i, k], h, gamma) ** 2
            for k in range(coeffs.modes):
                total += fd.derivative_multi(mu[k], h, gamma) ** 2
        sum_sigma_mu = max(sum_sigma_mu, float(np.max(total)))
    worst = max(worst_abc, sum_sigma_mu)
    return {
        "order": order,
        "worst_abc": worst_abc,
        "sigma_mu_l2_sum": sum_sigma_mu,
        "worst": worst,
        "K": coeffs.bound_K,
        "passed": bool(worst <= coeffs.bound_K * (1.0 + 1e-9) + 1e-12),
    }


def check_discrete_coercivity(
    coeffs: CoefficientSet,
    grid: Grid,
    t: float = 0.0,
    trials: int = 100,
    seed: int = 0,
) -> dict:
    """Fit the discrete coercivity pair (kappa_obs, Kprime_obs).

    Over random zero-boundary fields w the quantity

        r(w) = 2 <L w, w> + sum_k |M^k w|^2

    is regressed on (-|w|^2_{H1}, |w|^2_{L2}), where |w|^2_{H1} is the
    midpoint-gradient seminorm matching the flux form.  The fitted pair
    is then audited against every trial; the report passes when
    kappa_obs > 0 and the worst relative inequality residual is small.
    """
    from semispde.norms import h1_seminorm_sq

    rng = np.random.default_rng(seed)
    vol = grid.cell_volume
    rows = []
    for _ in range(trials):
        w = grid.zero_field()
        w[grid.interior] = rng.standard_normal([n - 2 for n in grid.points])
        lw = apply_L(w, coeffs, grid, t)
        mw = apply_M(w, coeffs, grid, t)
        r = 2.0 * float(np.sum(lw * w)) * vol + float(np.sum(mw**2)) * vol
        x = h1_seminorm_sq(w, grid)
        y = float(np.sum(w**2)) * vol
        rows.append((r, x, y))
    arr = np.asarray(rows)
    r, x, y = arr[:, 0], arr[:, 1], arr[:, 2]
    design = np.column_stack([-x, y])
    sol, *_ = np.linalg.lstsq(design, r, rcond=None)
    kappa_obs, kprime_obs = float(sol[0]), float(sol[1])
    resid = r - design @ sol
    scale = np.maximum(np.abs(r), np.maximum(x, 1.0))
    max_resid = float(np.max(np.abs(resid) / scale))
    return {
        "kappa_obs": kappa_obs,
        "kprime_obs": kprime_obs,
        "max_relative_residual": max_resid,
        "trials": trials,
        "kappa_declared": coeffs.kappa,
        "passed": bool(kappa_obs > 0.0),
    }


# ---------------------------------------------------------------------------
# presets and sampled fields


def _norm_matrix(dim: int, value) -> np.ndarray:
    value = np.asarray(value, dtype=float)
    if value.ndim == 0:
        return np.eye(dim) * float(value)
    if value.ndim == 1:
        if value.size != dim:
            raise ValueError(f"diagonal a needs {dim} entries, got {value.size}")
        return np.diag(value)
    if value.shape != (dim, dim):
        raise ValueError(f"a must be scalar, diagonal or {dim}x{dim}, got shape {value.shape}")
    return value


def _norm_vector(dim: int, value) -> np.ndarray:
    value = np.asarray(value, dtype=float)
    if value.ndim == 0:
        return np.full(dim, float(value))
    if value.size != dim:
        raise ValueError(f"vector coefficient needs {dim} entries, got {value.size}")
    return value.reshape(dim)


def _norm_sigma(dim: int, modes: int, value) -> np.ndarray:
    value = np.asarray(value, dtype=float)
    if value.ndim == 0:
        return np.full((dim, modes), float(value))
    if value.shape != (dim, modes):
        raise ValueError(f"sigma must be scalar or of shape ({dim}, {modes}), got {value.shape}")
    return value


def _norm_mu(modes: int, value) -> np.ndarray:
    value = np.asarray(value, dtype=float)
    if value.ndim == 0:
        return np.full(modes, float(value))
    if value.size != modes:
        raise ValueError(f"mu must be scalar or of length {modes}, got {value.size}")
    return value.reshape(modes)


def constant_coefficients(
    dim: int,
    modes: int,
    a=1.0,
    b=0.0,
    c=0.0,
    sigma=0.0,
    mu=0.0,
    kappa: float | None = None,
    bound: float | None = None,
) -> CoefficientSet:
    """Constant-coefficient set; kappa defaults to the exact margin."""
    a_mat = _norm_matrix(dim, a)
    b_vec = _norm_vector(dim, b)
    c_val = float(c)
    s_mat = _norm_sigma(dim, modes, sigma)
    mu_vec = _norm_mu(modes, mu)
    form = 0.5 * (a_mat + a_mat.T) - 0.5 * (s_mat @ s_mat.T)
    kappa_exact = float(np.linalg.eigvalsh(form).min())
    if kappa is None:
        kappa = kappa_exact
    if bound is None:
        bound = max(
            float(np.max(np.abs(a_mat))),
            float(np.max(np.abs(b_vec))) if dim else 0.0,
            abs(c_val),
            float(np.sum(s_mat**2) + np.sum(mu_vec**2)),
        )
    return CoefficientSet(
        dim=dim,
        modes=modes,
        a=tuple(tuple(_const_field(a_mat[i, j]) for j in range(dim)) for i in range(dim)),
        b=tuple(_const_field(b_vec[i]) for i in range(dim)),
        c=_const_field(c_val),
        sigma=tuple(tuple(_const_field(s_mat[i, k]) for k in range(modes)) for i in range(dim)),
        mu=tuple(_const_field(mu_vec[k]) for k in range(modes)),
        bound_K=float(bound),
        kappa=float(kappa),
        smooth_order=3,
        time_dependent=False,
        label="constant",
    )


def smooth_coefficients(
    dim: int,
    modes: int,
    a=1.0,
    a_variation: float = 0.25,
    b_amplitude: float = 0.0,
    c_amplitude: float = 0.0,
    sigma_amplitude: float = 0.0,
    mu_amplitude: float = 0.0,
    extents=None,
    kappa: float | None = None,
    bound: float | None = None,
) -> CoefficientSet:
    """Smoothly varying coefficients on the box.

    The shared profile s(x) = prod_a sin(pi x_a / L_a) lies in [0, 1]; the
    diffusion is a * (1 + a_variation * s), advection components are
    b_amplitude * cos(pi x_i / L_i), c is c_amplitude * (s - 1/2), and the
    noise coefficients decay geometrically over modes:
    sigma^{ik} = sigma_amplitude * 2^{-k} * s and likewise mu.
    """
    if not 0 <= a_variation < 1:
        raise ValueError(f"a_variation must lie in [0, 1), got {a_variation}")
    L = tuple(float(v) for v in (extents if extents is not None else (1.0,) * dim))
    if len(L) != dim:
        raise ValueError("extents must match dim")
    a_mat = _norm_matrix(dim, a)

    def profile(coords):
        s = np.ones_like(np.asarray(coords[0], dtype=float))
        for x, ell in zip(coords, L):
            s = s * np.sin(np.pi * x / ell)
        return s

    def a_fn(i, j):
        def fn(t, coords):
            return a_mat[i, j] * (1.0 + a_variation * profile(coords))

        return fn

    def b_fn(i):
        def fn(t, coords):
            return b_amplitude * np.cos(np.pi * np.asarray(coords[i], dtype=float) / L[i])

        return fn

    def c_fn(t, coords):
        return c_amplitude * (profile(coords) - 0.5)

    def sigma_fn(i, k):
        def fn(t, coords):
            return sigma_amplitude * 2.0 ** (-k) * profile(coords)

        return fn

    def mu_fn(k):
        def fn(t, coords):
            return mu_amplitude * 2.0 ** (-k) * profile(coords)

        return fn

    # Conservative declared margin: s in [0,1] keeps a >= a_mat and the
    # mode sums below the closed-form geometric tails.
    sig_sq = sigma_amplitude**2 * (4.0 / 3.0) * dim
    base_min = float(np.linalg.eigvalsh(0.5 * (a_mat + a_mat.T)).min())
    kappa_auto = base_min - 0.5 * sig_sq
    if kappa is None:
        kappa = kappa_auto
    if bound is None:
        # |D^gamma| of the trigonometric profiles gains a factor freq per
        # derivative order; sum the per-order multi-index counts for the
        # sigma/mu l2 sums up to third derivatives.  The 1.25 headroom
        # absorbs one-sided finite-difference overshoot at the edges.
        freq = max(1.0, max(np.pi / ell for ell in L))
        level = max(
            float(np.max(np.abs(a_mat))) * (1.0 + a_variation),
            abs(b_amplitude),
            abs(c_amplitude),
        )
        n_gammas = lambda m: 1 if dim == 1 else m + 1  # noqa: E731
        deriv_sum = sum(n_gammas(m) * freq ** (2 * m) for m in range(4))
        sigmu = (sig_sq + mu_amplitude**2 * (4.0 / 3.0)) * deriv_sum
        bound = 1.25 * max(level * freq**3, sigmu)
    return CoefficientSet(
        dim=dim,
        modes=modes,
        a=tuple(tuple(a_fn(i, j) for j in range(dim)) for i in range(dim)),
        b=tuple(b_fn(i) for i in range(dim)),
        c=c_fn,
        sigma=tuple(tuple(sigma_fn(i, k) for k in range(modes)) for i in range(dim)),
        mu=tuple(mu_fn(k) for k in range(modes)),
        bound_K=float(bound),
        kappa=float(kappa),
        smooth_order=3,
        time_dependent=False,
        label="smooth",
    )


def anisotropic_coefficients(
    modes: int,
    ax: float = 2.0,
    ay: float = 3.0,
    cross: float = 0.0,
    sigma=0.0,
    mu=0.0,
    kappa: float | None = None,
    bound: float | None = None,
) -> CoefficientSet:
    """Two-dimensional constant diffusion diag(ax, ay) plus optional cross terms."""
    a = np.array([[ax, cross], [cross, ay]], dtype=float)
    return replace(
        constant_coefficients(2, modes, a=a, sigma=sigma, mu=mu, kappa=kappa, bound=bound),
        label="anisotropic",
    )


def coefficients_from_preset(name: str, dim: int, modes: int, **params) -> CoefficientSet:
    if name == "constant":
        return constant_coefficients(dim, modes, **params)
    if name == "smooth":
        return smooth_coefficients(dim, modes, **params)
    if name == "anisotropic":
        if dim != 2:
            raise ValueError("anisotropic preset is two-dimensional")
        return anisotropic_coefficients(modes, **params)
    if name == "csv":
        return sampled_coefficients(dim, modes, **params)
    raise ValueError(f"unknown coefficient preset {name!r}")


# -- sampled (CSV) fields ----------------------------------------------------


def load_sampled_field(path, grid: Grid) -> FieldFn:
    """Load a field sampled on the grid from a columnar CSV file.

    The file must have header ``t,x,value`` (d = 1) or ``t,x,y,value``
    (d = 2) and, for every listed time, one row per grid node.  Evaluation
    is piecewise constant in time: the value at the largest sampled time
    not exceeding t.  A single sampled time therefore gives a static field.
    """
    want = ("t", "x", "value") if grid.dim == 1 else ("t", "x", "y", "value")
    with open(path, newline="") as fh:
        reader = csv.reader(fh)
        header = next(reader, None)
        if header is None or tuple(col.strip() for col in header) != want:
            raise ValueError(f"{path}: expected header {','.join(want)}, got {header}")
        rows = np.array([[float(v) for v in row] for row in reader if row])
    if rows.size == 0:
        raise ValueError(f"{path}: no data rows")
    times = np.unique(rows[:, 0])
    n_nodes = int(np.prod(grid.shape))
    coords = grid.coords()
    node_xy = np.column_stack([c.ravel() for c in coords])
    scale = max(grid.extents)
    data = np.empty((times.size,) + grid.shape)
    for it, tval in enumerate(times):
        chunk = rows[rows[:, 0] == tval]
        if chunk.shape[0] != n_nodes:
            raise ValueError(f"{path}: time {tval} has {chunk.shape[0]} rows, expected {n_nodes}")
        order = np.lexsort(tuple(chunk[:, i] for i in range(grid.dim, 0, -1)))
        chunk = chunk[order]
        if not np.allclose(chunk[:, 1 : 1 + grid.dim], node_xy, atol=1e-9 * scale, rtol=0.0):
            raise ValueError(f"{path}: sampled locations at time {tval} do not match the grid nodes")
        data[it] = chunk[:, -1].reshape(grid.shape)
    tol = 1e-9 * max(1.0, float(times.max()))

    def fn(t, coords_unused):
        idx = int(np.searchsorted(times, t + tol, side="right")) - 1
        if idx < 0:
            raise ValueError(f"sampled field queried at t={t} before first sample t={times[0]}")
        return data[idx]

    return fn


def sampled_coefficients(
    dim: int,
    modes: int,
    grid: Grid | None = None,
    files: dict | None = None,
    kappa: float = 0.0,
    bound: float = 1.0,
    smooth_order: int = 0,
    **defaults,
) -> CoefficientSet:
    """Coefficient set with components loaded from CSV sample files.

    ``files`` maps component names to paths: ``a11`` .. ``a22``, ``b1``,
    ``b2``, ``c``, ``sigma<i><k>`` and ``mu<k>`` with 1-based axis i and
    mode k.  Missing components fall back to the constants in ``defaults``
    (same keywords as :func:`constant_coefficients`).  Sampled coefficients
    are treated as time dependent; declared kappa and K must be supplied.
    """
    if grid is None:
        raise ValueError("sampled coefficients need the grid the samples live on")
    files = files or {}
    base = constant_coefficients(
        dim,
        modes,
        a=defaults.get("a", 1.0),
        b=defaults.get("b", 0.0),
        c=defaults.get("c", 0.0),
        sigma=defaults.get("sigma", 0.0),
        mu=defaults.get("mu", 0.0),
        kappa=kappa,
        bound=bound,
    )
    a = [list(row) for row in base.a]
    b = list(base.b)
    c = base.c
    sigma = [list(row) for row in base.sigma]
    mu = list(base.mu)
    for name, path in sorted(files.items()):
        fn = load_sampled_field(path, grid)
        if name == "c":
            c = fn
        elif name.startswith("a") and len(name) == 3:
            i, j = int(name[1]) - 1, int(name[2]) - 1
            a[i][j] = fn
        elif name.startswith("b") and len(name) == 2:
            b[int(name[1]) - 1] = fn
        elif name.startswith("sigma") and len(name) == 7:
            i, k = int(name[5]) - 1, int(name[6]) - 1
            sigma[i][k] = fn
        elif name.startswith("mu") and len(name) == 3:
            mu[int(name[2]) - 1] = fn
        else:
            raise ValueError(f"unrecognized sampled component {name!r}")
    return CoefficientSet(
        dim=dim,
        modes=modes,
        a=tuple(tuple(row) for row in a),
        b=tuple(b),
        c=c,
        sigma=tuple(tuple(row) for row in sigma),
        mu=tuple(mu),
        bound_K=float(bound),
        kappa=float(kappa),
        smooth_order=smooth_order,
        time_dependent=True,
        label="csv",
    )


# -- forcing presets ---------------------------------------------------------


def _sine_profile(extents):
    def fn(t, coords):
        s = np.ones_like(np.asarray(coords[0], dtype=float))
        for x, ell in zip(coords, extents):
            s = s * np.sin(np.pi * x / ell)
        return s

    return fn


def forcing_from_preset(
    dim: int,
    modes: int,
    f0: str = "zero",
    f0_value: float = 0.0,
    g: str = "zero",
    g_value: float = 0.0,
    g_mode: int = 0,
    extents=None,
) -> ForcingSet:
    """Build a forcing set from preset names.

    f0 presets: ``zero``, ``constant`` (value f0_value), ``sine``
    (f0_value times the product-of-sines profile).  g presets: ``zero``,
    ``constant`` (every mode equals g_value), ``single_mode`` (g_value on
    mode g_mode only), ``sine`` (mode k carries g_value * 2^{-k} times the
    sine profile, so the mode sum converges).
    """
    L = tuple(float(v) for v in (extents if extents is not None else (1.0,) * dim))
    sine = _sine_profile(L)

    if f0 == "zero":
        f0_fn = _const_field(0.0)
    elif f0 == "constant":
        f0_fn = _const_field(f0_value)
    elif f0 == "sine":
        amp = float(f0_value)

        def f0_fn(t, coords, _amp=amp):
            return _amp * sine(t, coords)

    else:
        raise ValueError(f"unknown f0 preset {f0!r}")

    def g_const(k):
        if g == "zero":
            return _const_field(0.0)
        if g == "constant":
            return _const_field(g_value)
        if g == "single_mode":
            return _const_field(g_value if k == g_mode else 0.0)
        if g == "sine":
            amp = float(g_value) * 2.0 ** (-k)

            def fn(t, coords, _amp=amp):
                return _amp * sine(t, coords)

            return fn
        raise ValueError(f"unknown g preset {g!r}")

    if g == "single_mode" and not 0 <= g_mode < max(modes, 1):
        raise ValueError(f"g_mode {g_mode} outside [0, {modes})")
    return ForcingSet(
        dim=dim,
        modes=modes,
        f0=f0_fn,
        g=tuple(g_const(k) for k in range(modes)),
        label=f"f0={f0},g={g}",
    )
