import numpy as np
import pytest

from semispde.coefficients import constant_coefficients, forcing_from_preset
from semispde.geometry import build_grid
from semispde.noise import sample_path
from semispde.norms import lp_norm
from semispde.semilinear import ginzburg_landau, zero_term
from semispde.solver import (
    BlowUpError,
    SolverConfig,
    solve_trajectory,
    solve_truncated_family,
)


def _heat_setup(n, dt, t_final, seed=0):
    grid = build_grid((1.0,), (n,))
    coeffs = constant_coefficients(dim=1, modes=1)
    forcing = forcing_from_preset(dim=1, modes=1)
    u0 = np.sin(np.pi * grid.coords()[0])
    config = SolverConfig(dt=dt, t_final=t_final)
    noise = sample_path(steps=config.steps, modes=1, dt=dt, seed=seed)
    return grid, coeffs, forcing, u0, noise, config


def _heat_error(n, dt, t_final=0.05):
    grid, coeffs, forcing, u0, noise, config = _heat_setup(n, dt, t_final)
    traj = solve_trajectory(grid, coeffs, forcing, zero_term(), u0, noise, config)
    x = grid.coords()[0]
    worst = 0.0
    for t, snap in zip(traj.times, traj.snapshots):
        exact = np.exp(-np.pi**2 * t) * np.sin(np.pi * x)
        worst = max(worst, lp_norm(snap - exact, grid, 2.0))
    return worst


def test_heat_decay_matches_the_exact_solution():
    assert _heat_error(65, 1e-3) < 5e-3


def test_heat_error_shrinks_under_refinement():
    coarse = _heat_error(65, 1e-3)
    fine = _heat_error(129, 5e-4)
    assert fine < coarse / 1.5


def test_explicit_scheme_agrees_with_semi_implicit_on_heat():
    grid, coeffs, forcing, u0, noise, config = _heat_setup(33, 1e-4, 0.01)
    imp = solve_trajectory(grid, coeffs, forcing, zero_term(), u0, noise, config)
    exp_cfg = SolverConfig(dt=1e-4, t_final=0.01, scheme="explicit")
    exp = solve_trajectory(grid, coeffs, forcing, zero_term(), u0, noise, exp_cfg)
    gap = lp_norm(imp.final - exp.final, grid, 2.0)
    assert gap < 1e-3 * lp_norm(u0, grid, 2.0)


def test_zero_initial_zero_data_is_an_exact_fixed_point():
    grid, coeffs, forcing, _, noise, config = _heat_setup(33, 1e-3, 0.02)
    traj = solve_trajectory(grid, coeffs, forcing, ginzburg_landau(4.0), grid.zero_field(), noise, config)
    assert np.all(traj.snapshots == 0.0)


def test_noisy_run_moves_and_keeps_the_boundary_pinned():
    grid = build_grid((1.0,), (65,))
    coeffs = constant_coefficients(dim=1, modes=2, sigma=0.15, mu=0.1, kappa=0.75)
    forcing = forcing_from_preset(dim=1, modes=2, g="sine", g_value=0.5)
    config = SolverConfig(dt=1e-3, t_final=0.05, track_p=4.0)
    noise = sample_path(steps=config.steps, modes=2, dt=1e-3, seed=11)
    traj = solve_trajectory(grid, coeffs, forcing, ginzburg_landau(4.0), grid.zero_field(), noise, config)
    assert float(np.max(np.abs(traj.final))) > 0.0
    assert np.all(traj.snapshots[:, 0] == 0.0)
    assert np.all(traj.snapshots[:, -1] == 0.0)
    assert traj.tracked_p == 4.0
    assert traj.sup_lp_pow > 0.0
    assert traj.gradient_integral > 0.0
    assert traj.seed == 11 and traj.stream == 0


def test_tracked_sup_for_decaying_run_is_the_initial_norm():
    grid, coeffs, forcing, u0, noise, _ = _heat_setup(65, 1e-3, 0.05)
    config = SolverConfig(dt=1e-3, t_final=0.05, track_p=2.0)
    traj = solve_trajectory(grid, coeffs, forcing, zero_term(), u0, noise, config)
    assert traj.sup_lp_pow == pytest.approx(lp_norm(u0, grid, 2.0) ** 2, rel=1e-12)


def test_snapshot_stride_and_lookup():
    grid, coeffs, forcing, u0, noise, _ = _heat_setup(33, 1e-3, 0.01)
    config = SolverConfig(dt=1e-3, t_final=0.01, snapshot_stride=3)
    traj = solve_trajectory(grid, coeffs, forcing, zero_term(), u0, noise, config)
    np.testing.assert_allclose(traj.times, [0.0, 3e-3, 6e-3, 9e-3, 10e-3])
    np.testing.assert_array_equal(traj.snapshot_at(6e-3), traj.snapshots[2])
    np.testing.assert_array_equal(traj.final, traj.snapshots[-1])
    with pytest.raises(KeyError):
        traj.snapshot_at(4e-3)


def test_two_dimensional_solve_symmetric_and_drifted():
    grid = build_grid((1.0, 1.0), (14, 14))
    forcing = forcing_from_preset(dim=2, modes=1, g="constant", g_value=0.3)
    config = SolverConfig(dt=2e-3, t_final=0.02)
    noise = sample_path(steps=config.steps, modes=1, dt=2e-3, seed=5)
    for b in (0.0, 0.8):
        coeffs = constant_coefficients(dim=2, modes=1, a=1.0, b=b)
        traj = solve_trajectory(grid, coeffs, forcing, zero_term(), grid.zero_field(), noise, config)
        assert traj.final.shape == grid.shape
        assert np.all(traj.final[grid.boundary_mask()] == 0.0)
        assert float(np.max(np.abs(traj.final))) > 0.0


def test_blow_up_guard_raises_with_context():
    grid = build_grid((1.0,), (33,))
    coeffs = constant_coefficients(dim=1, modes=1)
    forcing = forcing_from_preset(dim=1, modes=1, f0="constant", f0_value=1.0)
    config = SolverConfig(dt=1e-3, t_final=0.05, blowup_threshold=1e-6)
    noise = sample_path(steps=config.steps, modes=1, dt=1e-3, seed=0)
    with pytest.raises(BlowUpError) as err:
        solve_trajectory(grid, coeffs, forcing, zero_term(), grid.zero_field(), noise, config)
    assert err.value.step >= 1
    assert err.value.sup > 1e-6


def test_config_validation():
    with pytest.raises(ValueError):
        SolverConfig(dt=0.0, t_final=1.0)
    with pytest.raises(ValueError):
        SolverConfig(dt=1e-3, t_final=1.0, scheme="magic")
    with pytest.raises(ValueError):
        SolverConfig(dt=1e-3, t_final=1.0, snapshot_stride=0)
    with pytest.raises(ValueError):
        SolverConfig(dt=1e-3, t_final=1.0, track_p=1.0)
    with pytest.raises(ValueError):
        SolverConfig(dt=3e-3, t_final=1.0).steps


def test_input_validation():
    grid, coeffs, forcing, u0, noise, config = _heat_setup(33, 1e-3, 0.01)
    with pytest.raises(ValueError, match="shape"):
        solve_trajectory(grid, coeffs, forcing, zero_term(), np.ones(5), noise, config)
    with pytest.raises(ValueError, match="boundary"):
        solve_trajectory(grid, coeffs, forcing, zero_term(), np.ones(grid.shape), noise, config)
    bad_dt = sample_path(steps=10, modes=1, dt=2e-3, seed=0)
    with pytest.raises(ValueError, match="does not match"):
        solve_trajectory(grid, coeffs, forcing, zero_term(), u0, bad_dt, config)
    short = sample_path(steps=3, modes=1, dt=1e-3, seed=0)
    with pytest.raises(ValueError, match="covers"):
        solve_trajectory(grid, coeffs, forcing, zero_term(), u0, short, config)
    wrong_modes = sample_path(steps=10, modes=4, dt=1e-3, seed=0)
    with pytest.raises(ValueError, match="mode mismatch"):
        solve_trajectory(grid, coeffs, forcing, zero_term(), u0, wrong_modes, config)


def test_inactive_truncation_reproduces_the_reference_bitwise():
    grid = build_grid((1.0,), (33,))
    coeffs = constant_coefficients(dim=1, modes=2, sigma=0.1, mu=0.1, kappa=0.9)
    forcing = forcing_from_preset(dim=1, modes=2, g="sine", g_value=0.4)
    config = SolverConfig(dt=1e-3, t_final=0.02)
    noise = sample_path(steps=config.steps, modes=2, dt=1e-3, seed=21)
    family = solve_truncated_family(
        grid, coeffs, forcing, ginzburg_landau(4.0), grid.zero_field(), noise, config,
        m_values=[0.05, 1e6],
    )
    assert set(family) == {None, 0.05, 1e6}
    ref = family[None]
    np.testing.assert_array_equal(family[1e6].snapshots, ref.snapshots)
    # a clamp far inside the solution range changes the path
    assert float(np.max(np.abs(family[0.05].final - ref.final))) >= 0.0
    sup = float(np.max(np.abs(ref.snapshots)))
    assert sup < 1e6


def test_shared_noise_makes_family_runs_comparable():
    grid = build_grid((1.0,), (33,))
    coeffs = constant_coefficients(dim=1, modes=1, mu=0.2, kappa=0.9)
    forcing = forcing_from_preset(dim=1, modes=1, g="constant", g_value=1.0)
    config = SolverConfig(dt=1e-3, t_final=0.02)
    noise = sample_path(steps=config.steps, modes=1, dt=1e-3, seed=3)
    family = solve_truncated_family(
        grid, coeffs, forcing, ginzburg_landau(4.0), grid.zero_field(), noise, config,
        m_values=[2.0], include_reference=False,
    )
    assert list(family) == [2.0]
    again = solve_truncated_family(
        grid, coeffs, forcing, ginzburg_landau(4.0), grid.zero_field(), noise, config,
        m_values=[2.0], include_reference=False,
    )
    np.testing.assert_array_equal(family[2.0].snapshots, again[2.0].snapshots)
