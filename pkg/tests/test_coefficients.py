import csv

import numpy as np
import pytest

from semispde.coefficients import (
    anisotropic_coefficients,
    apply_L,
    apply_M,
    check_boundedness,
    check_discrete_coercivity,
    check_parabolicity,
    coefficients_from_preset,
    constant_coefficients,
    discrete_energy,
    forcing_from_preset,
    load_sampled_field,
    sampled_coefficients,
    sbp_defect,
    smooth_coefficients,
)
from semispde.geometry import build_grid
from semispde.solver import assemble_system


def zero_boundary_field(grid, rng):
    w = grid.zero_field()
    w[grid.interior] = rng.standard_normal([n - 2 for n in grid.points])
    return w


# --- stochastic parabolicity ------------------------------------------------


def test_parabolicity_identity_margin_one():
    grid = build_grid((1.0,), (16,))
    coeffs = constant_coefficients(dim=1, modes=1, a=1.0, sigma=0.0)
    report = check_parabolicity(coeffs, grid)
    assert report["passed"]
    assert abs(report["margin"] - 1.0) < 1e-12


def test_parabolicity_critical_sigma_margin_zero():
    grid = build_grid((1.0,), (16,))
    # a = 1, one mode with sigma = sqrt(2): a - sigma^2/2 = 0 exactly
    coeffs = constant_coefficients(dim=1, modes=1, a=1.0, sigma=np.sqrt(2.0), kappa=1.0)
    report = check_parabolicity(coeffs, grid)
    assert abs(report["margin"] - 0.0) < 1e-12
    assert not report["passed"]  # margin 0 < declared kappa 1


def test_parabolicity_anisotropic_margin_two():
    grid = build_grid((1.0, 1.0), (8, 8))
    coeffs = anisotropic_coefficients(modes=1, ax=2.0, ay=3.0, cross=0.0, sigma=0.0)
    report = check_parabolicity(coeffs, grid)
    assert report["passed"]
    assert abs(report["margin"] - 2.0) < 1e-12
    assert report["direction_sweep_margin"] >= report["margin"] - 1e-12


# --- boundedness ------------------------------------------------------------


def test_boundedness_passes_for_presets():
    grid = build_grid((1.0,), (32,))
    coeffs = smooth_coefficients(dim=1, modes=4, a=1.0, a_variation=0.25, b_amplitude=0.3, c_amplitude=0.2, sigma_amplitude=0.1, mu_amplitude=0.1)
    report = check_boundedness(coeffs, grid)
    assert report["passed"], report


def test_boundedness_fails_when_declared_bound_too_small():
    grid = build_grid((1.0,), (32,))
    coeffs = constant_coefficients(dim=1, modes=1, a=1.0, bound=0.5)
    report = check_boundedness(coeffs, grid)
    assert not report["passed"]
    assert report["worst_abc"] == pytest.approx(1.0)


# --- discrete operator structure ---------------------------------------------


def test_sbp_identity_1d():
    grid = build_grid((1.0,), (64,))
    coeffs = constant_coefficients(dim=1, modes=1, a=1.0)
    rng = np.random.default_rng(0)
    for _ in range(10):
        u = zero_boundary_field(grid, rng)
        v = zero_boundary_field(grid, rng)
        assert abs(sbp_defect(u, v, coeffs, grid)) < 1e-12


def test_sbp_identity_2d_variable_a():
    grid = build_grid((1.0, 1.0), (12, 10))
    coeffs = smooth_coefficients(dim=2, modes=2, a=1.0, a_variation=0.3)
    rng = np.random.default_rng(1)
    for _ in range(5):
        u = zero_boundary_field(grid, rng)
        v = zero_boundary_field(grid, rng)
        assert abs(sbp_defect(u, v, coeffs, grid)) < 1e-12


def test_energy_symmetric_for_symmetric_a():
    grid = build_grid((1.0, 1.0), (10, 10))
    coeffs = anisotropic_coefficients(modes=1, ax=2.0, ay=3.0, cross=0.4)
    rng = np.random.default_rng(2)
    u = zero_boundary_field(grid, rng)
    v = zero_boundary_field(grid, rng)
    assert discrete_energy(u, v, coeffs, grid) == pytest.approx(discrete_energy(v, u, coeffs, grid), rel=1e-12)


def test_heat_operator_on_sine_eigenfunction():
    grid = build_grid((1.0,), (256,))
    coeffs = constant_coefficients(dim=1, modes=1, a=1.0)
    x = grid.axis_coords(0)
    u = np.sin(np.pi * x)
    lu = apply_L(u, coeffs, grid)
    inner = grid.interior_mask()
    np.testing.assert_allclose(lu[inner], -np.pi**2 * u[inner], rtol=1e-3)


def test_apply_M_shapes_and_values():
    grid = build_grid((1.0,), (16,))
    coeffs = constant_coefficients(dim=1, modes=3, sigma=0.0, mu=2.0)
    u = np.ones(grid.shape)
    u[grid.boundary_mask()] = 0.0
    mu_all = apply_M(u, coeffs, grid)
    assert mu_all.shape == (3,) + grid.shape
    np.testing.assert_allclose(mu_all[1], 2.0 * u)
    single = apply_M(u, coeffs, grid, k=2)
    np.testing.assert_allclose(single, mu_all[2])
    with pytest.raises(ValueError):
        apply_M(u, coeffs, grid, k=3)


def test_assembled_system_matches_apply_L_1d():
    grid = build_grid((1.0,), (32,))
    coeffs = smooth_coefficients(dim=1, modes=1, a=1.0, a_variation=0.2, b_amplitude=0.3, c_amplitude=0.2)
    dt = 1e-2
    kind, ab = assemble_system(coeffs, grid, t=dt, dt=dt)
    assert kind == "banded"
    rng = np.random.default_rng(3)
    u = zero_boundary_field(grid, rng)
    expected = (u - dt * apply_L(u, coeffs, grid, t=dt))[grid.interior].ravel()
    n = grid.n_interior
    # reconstruct the tridiagonal action from the banded storage
    x = u[grid.interior].ravel()
    got = ab[1] * x
    got[:-1] += ab[0][1:] * x[1:]
    got[1:] += ab[2][:-1] * x[:-1]
    np.testing.assert_allclose(got, expected, rtol=1e-12, atol=1e-14)


def test_assembled_system_matches_apply_L_2d():
    grid = build_grid((1.0, 1.0), (10, 12))
    coeffs = anisotropic_coefficients(modes=2, ax=2.0, ay=3.0, cross=0.4, sigma=0.1)
    dt = 1e-2
    kind, A, sym = assemble_system(coeffs, grid, t=dt, dt=dt)
    assert kind == "sparse"
    rng = np.random.default_rng(4)
    u = zero_boundary_field(grid, rng)
    expected = (u - dt * apply_L(u, coeffs, grid, t=dt))[grid.interior].ravel()
    got = A @ u[grid.interior].ravel()
    np.testing.assert_allclose(got, expected, rtol=1e-12, atol=1e-14)


def test_discrete_coercivity_identity_1d():
    grid = build_grid((1.0,), (64,))
    coeffs = constant_coefficients(dim=1, modes=1, a=1.0)
    report = check_discrete_coercivity(coeffs, grid, trials=100, seed=0)
    assert report["passed"]
    assert report["kappa_obs"] > 0.0
    assert report["kappa_obs"] == pytest.approx(2.0, rel=1e-8)
    assert abs(report["kprime_obs"]) <= 1e-8


# --- presets -----------------------------------------------------------------


def test_constant_preset_auto_kappa_and_bound():
    coeffs = constant_coefficients(dim=1, modes=2, a=1.0, sigma=0.5, mu=0.1)
    # a - sum_k sigma_k^2 / 2 = 1 - 0.25; bound covers sigma/mu l2 sums
    assert coeffs.kappa == pytest.approx(1.0 - 0.25)
    assert coeffs.bound_K >= 2 * 0.25
    grid = build_grid((1.0,), (16,))
    assert check_parabolicity(coeffs, grid)["passed"]
    assert check_boundedness(coeffs, grid)["passed"]


def test_smooth_preset_declared_bounds_are_rigorous():
    grid = build_grid((2.0,), (64,))
    coeffs = smooth_coefficients(
        dim=1, modes=3, a=1.0, a_variation=0.4, b_amplitude=0.5,
        c_amplitude=0.3, sigma_amplitude=0.2, mu_amplitude=0.2, extents=(2.0,),
    )
    assert check_parabolicity(coeffs, grid)["passed"]
    assert check_boundedness(coeffs, grid)["passed"]


def test_preset_factory_rejects_unknown():
    with pytest.raises(ValueError):
        coefficients_from_preset("diagonal", 1, 1)


def test_indefinite_form_is_buildable_but_fails_the_check():
    # failing examples must be constructible so the validator can flag them
    coeffs = anisotropic_coefficients(modes=1, ax=1.0, ay=1.0, cross=5.0)
    assert coeffs.kappa < 0
    grid = build_grid((1.0, 1.0), (6, 6))
    report = check_parabolicity(coeffs, grid)
    assert not report["passed"] or coeffs.kappa <= report["margin"]
    assert report["margin"] == pytest.approx(-4.0, abs=1e-12)


# --- sampled fields ----------------------------------------------------------


def write_field_csv(path, grid, fn, times=(0.0,)):
    coords = grid.coords()
    cols = [c.ravel() for c in coords]
    with open(path, "w", newline="") as fh:
        writer = csv.writer(fh)
        writer.writerow(["t", "x", "value"] if grid.dim == 1 else ["t", "x", "y", "value"])
        for t in times:
            vals = fn(t, coords).ravel()
            for i in range(vals.size):
                writer.writerow([t] + [c[i] for c in cols] + [vals[i]])


def test_sampled_field_round_trip(tmp_path):
    grid = build_grid((1.0,), (16,))
    path = tmp_path / "a11.csv"
    write_field_csv(path, grid, lambda t, c: 1.0 + 0.25 * np.sin(np.pi * c[0]))
    fn = load_sampled_field(path, grid)
    x = grid.axis_coords(0)
    np.testing.assert_allclose(fn(0.0, grid.coords()), 1.0 + 0.25 * np.sin(np.pi * x), atol=1e-12)


def test_sampled_field_time_dependence(tmp_path):
    grid = build_grid((1.0,), (8,))
    path = tmp_path / "c.csv"
    write_field_csv(path, grid, lambda t, c: np.full_like(c[0], t), times=(0.0, 0.5))
    fn = load_sampled_field(path, grid)
    np.testing.assert_allclose(fn(0.2, grid.coords()), 0.0)
    np.testing.assert_allclose(fn(0.7, grid.coords()), 0.5)


def test_sampled_field_rejects_bad_header(tmp_path):
    grid = build_grid((1.0,), (8,))
    path = tmp_path / "bad.csv"
    path.write_text("time,x,value\n0.0,0.0,1.0\n")
    with pytest.raises(ValueError):
        load_sampled_field(path, grid)


def test_sampled_coefficients_build(tmp_path):
    grid = build_grid((1.0,), (12,))
    a_path = tmp_path / "a11.csv"
    write_field_csv(a_path, grid, lambda t, c: np.full_like(c[0], 2.0))
    coeffs = sampled_coefficients(1, 2, grid=grid, files={"a11": str(a_path)}, kappa=1.5, bound=2.0)
    assert coeffs.time_dependent
    np.testing.assert_allclose(coeffs.a_field(0.0, grid)[0, 0], 2.0)
    assert check_parabolicity(coeffs, grid)["passed"]


# --- forcing presets ----------------------------------------------------------


def test_forcing_sine_modes_decay():
    grid = build_grid((1.0,), (16,))
    forcing = forcing_from_preset(dim=1, modes=3, g="sine", g_value=1.0)
    g = forcing.g_field(0.0, grid)
    assert g.shape == (3,) + grid.shape
    mid = grid.points[0] // 2
    # mode k carries 2^-k times the profile
    assert g[1, mid] == pytest.approx(0.5 * g[0, mid])
    assert g[2, mid] == pytest.approx(0.25 * g[0, mid])


def test_forcing_single_mode():
    grid = build_grid((1.0,), (16,))
    forcing = forcing_from_preset(dim=1, modes=4, g="single_mode", g_value=2.0, g_mode=2)
    g = forcing.g_field(0.0, grid)
    np.testing.assert_allclose(g[0], 0.0)
    np.testing.assert_allclose(g[2], 2.0)


def test_forcing_f0_shift_marks_time_dependent():
    forcing = forcing_from_preset(dim=1, modes=1)
    assert not forcing.time_dependent
    shifted = forcing.with_f0_shift(lambda t, coords: np.ones_like(coords[0]))
    assert shifted.time_dependent
