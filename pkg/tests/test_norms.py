import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from semispde.geometry import boundary_distance, build_grid, carve_subdomain
from semispde.norms import (
    WeightedNormSpec,
    difference_quotient,
    gradient_power_integrand,
    gradient_weighted_integral,
    h1_seminorm_sq,
    lp_norm,
    mid_theta,
    quadrature_weights,
    region_weights,
    shift,
    sobolev_norm,
    space_time_lp_pow,
    theta_window,
    weighted_equivalence_check,
    weighted_norm,
    weighted_norm_from_spec,
)


def test_quadrature_weights_sum_to_box_volume():
    grid = build_grid((1.0, 2.0), (17, 33))
    w = quadrature_weights(grid)
    assert np.sum(w) == pytest.approx(2.0, rel=1e-12)
    # boundary faces carry half cells
    assert w[0, 0] == pytest.approx(0.25 * grid.cell_volume)
    assert w[5, 0] == pytest.approx(0.5 * grid.cell_volume)
    assert w[5, 7] == pytest.approx(grid.cell_volume)


def test_lp_norm_of_one_is_box_volume_root():
    grid = build_grid((1.0,), (129,))
    u = np.ones(grid.shape)
    for p in (1.0, 2.0, 4.0):
        assert lp_norm(u, grid, p) == pytest.approx(1.0, rel=1e-12)
    grid2 = build_grid((2.0, 0.5), (17, 17))
    u2 = np.ones(grid2.shape)
    assert lp_norm(u2, grid2, 2.0) == pytest.approx(1.0, rel=1e-12)


def test_lp_norm_rejects_nonpositive_p():
    grid = build_grid((1.0,), (9,))
    with pytest.raises(ValueError):
        lp_norm(np.ones(grid.shape), grid, 0.0)


def test_lp_norm_sine_oracle():
    # int_0^1 sin(pi x)^2 dx = 1/2
    grid = build_grid((1.0,), (257,))
    u = np.sin(np.pi * grid.coords()[0])
    assert lp_norm(u, grid, 2.0) == pytest.approx(np.sqrt(0.5), rel=1e-5)


def test_h1_seminorm_sine():
    # int_0^1 (pi cos(pi x))^2 dx = pi^2 / 2
    grid = build_grid((1.0,), (513,))
    u = np.sin(np.pi * grid.coords()[0])
    assert h1_seminorm_sq(u, grid) == pytest.approx(np.pi**2 / 2.0, rel=1e-5)


def test_gradient_power_integrand_p2_is_dirichlet_energy():
    # the zero-filled centered stencil clips the slope on the boundary
    # cells, an O(h) effect, so the error must shrink under refinement
    exact = np.pi**2 / 2.0
    errs = []
    for n in (513, 1025):
        grid = build_grid((1.0,), (n,))
        u = np.sin(np.pi * grid.coords()[0])
        errs.append(abs(gradient_power_integrand(u, grid, 2.0) - exact))
    assert errs[0] < 5e-3 * exact
    assert errs[1] < 0.6 * errs[0]
    grid = build_grid((1.0,), (65,))
    with pytest.raises(ValueError):
        gradient_power_integrand(np.ones(grid.shape), grid, 1.5)


def test_gradient_weighted_integral_static_field():
    grid = build_grid((1.0,), (257,))
    u = np.sin(np.pi * grid.coords()[0])
    times = np.linspace(0.0, 0.3, 7)
    snaps = np.broadcast_to(u, (7,) + grid.shape)
    val = gradient_weighted_integral(snaps, times, grid, 2.0)
    assert val == pytest.approx(0.3 * np.pi**2 / 2.0, rel=1e-2)


def test_space_time_lp_pow_constant():
    grid = build_grid((1.0,), (65,))
    times = np.linspace(0.0, 0.25, 6)
    vals = np.ones((6,) + grid.shape)
    assert space_time_lp_pow(vals, times, grid, 4.0) == pytest.approx(0.25, rel=1e-12)


def test_sobolev_norm_region_oracle():
    # u = x on the margin-0.25 core of (0,1):
    # int_{1/4}^{3/4} x^2 = (0.75^3 - 0.25^3)/3 and int (u')^2 = 1/2
    grid = build_grid((1.0,), (257,))
    u = grid.coords()[0].copy()
    region = carve_subdomain(grid, 0.25)
    zeroth = sobolev_norm(u, grid, 0, region=region)
    expected0 = (0.75**3 - 0.25**3) / 3.0
    assert zeroth**2 == pytest.approx(expected0, rel=1e-4)
    first = sobolev_norm(u, grid, 1, region=region)
    assert first**2 == pytest.approx(expected0 + 0.5, rel=1e-4)


def test_sobolev_norm_full_box_matches_lp_for_order_zero():
    grid = build_grid((1.0,), (65,))
    rng = np.random.default_rng(0)
    u = rng.normal(size=grid.shape)
    assert sobolev_norm(u, grid, 0) == pytest.approx(lp_norm(u, grid, 2.0), rel=1e-12)
    with pytest.raises(ValueError):
        sobolev_norm(u, grid, 4)


def test_region_weights_shape_check_and_runs():
    grid = build_grid((1.0,), (9,))
    with pytest.raises(ValueError):
        region_weights(grid, np.ones((5,), dtype=bool))
    full = np.ones(grid.shape, dtype=bool)
    np.testing.assert_allclose(region_weights(grid, full), quadrature_weights(grid))
    # an isolated node keeps half a cell
    lone = np.zeros(grid.shape, dtype=bool)
    lone[4] = True
    w = region_weights(grid, lone)
    assert w[4] == pytest.approx(0.5 * grid.spacing[0])
    assert np.sum(w) == pytest.approx(0.5 * grid.spacing[0])


def test_shift_and_difference_quotient():
    grid = build_grid((1.0,), (11,))
    x = grid.coords()[0]
    u = x**2
    dq = difference_quotient(u, grid, 0, steps=1)
    h = grid.spacing[0]
    np.testing.assert_allclose(dq[:-1], 2.0 * x[:-1] + h, rtol=1e-12)
    # the last node sees the zero extension
    assert dq[-1] == pytest.approx(-u[-1] / h)
    with pytest.raises(ValueError):
        difference_quotient(u, grid, 0, steps=0)
    with pytest.raises(ValueError):
        shift(u, grid, axis=1, steps=1)


def test_theta_window_and_midpoint():
    assert theta_window(1, 2.0) == (1.0, 2.0)
    assert mid_theta(1, 2.0) == pytest.approx(1.5)
    assert theta_window(2, 8.0) == (8.0, 9.0)
    assert mid_theta(2, 8.0) == pytest.approx(8.5)


def test_weighted_norm_constant_field_oracle():
    # u = 1 on (0,1), q = 2, theta = 3/2, order 0:
    # norm^q = int_0^1 rho(x)^(1/2) dx = 2 (1/2)^(3/2) / (3/2)
    expected = 2.0 * 0.5**1.5 / 1.5
    for n, rel in ((256, 1e-2), (1024, 2.5e-3)):
        grid = build_grid((1.0,), (n,))
        u = np.ones(grid.shape)
        val = weighted_norm(u, grid, q=2.0, theta=1.5, order=0)
        assert val**2 == pytest.approx(expected, rel=rel)


def test_weighted_norm_spec_roundtrip_and_validation():
    grid = build_grid((1.0,), (128,))
    u = np.sin(np.pi * grid.coords()[0])
    rho = boundary_distance(grid)
    spec = WeightedNormSpec(order=1, q=2.0, theta=1.5, distance=rho)
    direct = weighted_norm(u, grid, 2.0, 1.5, order=1, rho=rho.values)
    assert weighted_norm_from_spec(u, grid, spec) == pytest.approx(direct, rel=1e-14)
    assert spec.in_window(1)
    assert not WeightedNormSpec(order=0, q=2.0, theta=5.0).in_window(1)
    with pytest.raises(ValueError):
        WeightedNormSpec(order=5, q=2.0, theta=1.5)
    with pytest.raises(ValueError):
        WeightedNormSpec(order=1, q=0.0, theta=1.5)


def test_weighted_norm_warns_outside_window():
    grid = build_grid((1.0,), (64,))
    u = np.ones(grid.shape)
    with pytest.warns(UserWarning, match="outside the window"):
        weighted_norm(u, grid, q=2.0, theta=4.0)
    with pytest.warns(UserWarning, match="q >= 2"):
        weighted_norm(u, grid, q=1.0, theta=0.5)


def test_weighted_norm_monotone_in_order():
    grid = build_grid((1.0,), (128,))
    u = np.sin(np.pi * grid.coords()[0])
    n0 = weighted_norm(u, grid, 2.0, 1.5, order=0)
    n1 = weighted_norm(u, grid, 2.0, 1.5, order=1)
    n2 = weighted_norm(u, grid, 2.0, 1.5, order=2)
    assert 0.0 < n0 < n1 < n2


def test_weighted_equivalence_ratio_stable_under_refinement():
    ratios = []
    for n in (128, 256):
        grid = build_grid((1.0,), (n,))
        u = np.sin(np.pi * grid.coords()[0])
        rep = weighted_equivalence_check(u, grid, q=2.0, theta=1.5, order=1)
        assert rep["lhs"] > 0 and rep["rhs"] > 0
        ratios.append(rep["ratio"])
    assert 0.1 < ratios[0] < 10.0
    assert ratios[1] == pytest.approx(ratios[0], rel=0.05)
    grid = build_grid((1.0,), (64,))
    with pytest.raises(ValueError):
        weighted_equivalence_check(np.ones(grid.shape), grid, 2.0, 1.5, order=0)


@given(
    p=st.floats(min_value=1.0, max_value=8.0),
    scale=st.floats(min_value=0.1, max_value=10.0),
)
@settings(max_examples=25, deadline=None)
def test_lp_norm_homogeneity(p, scale):
    grid = build_grid((1.0,), (33,))
    rng = np.random.default_rng(7)
    u = rng.normal(size=grid.shape)
    assert lp_norm(scale * u, grid, p) == pytest.approx(scale * lp_norm(u, grid, p), rel=1e-9)


@given(n=st.sampled_from([33, 65, 129]), theta=st.floats(min_value=1.1, max_value=1.9))
@settings(max_examples=20, deadline=None)
def test_weighted_norm_scales_with_field(n, theta):
    grid = build_grid((1.0,), (n,))
    u = np.sin(np.pi * grid.coords()[0])
    one = weighted_norm(u, grid, 2.0, theta)
    two = weighted_norm(2.0 * u, grid, 2.0, theta)
    assert two == pytest.approx(2.0 * one, rel=1e-9)
