import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from semispde.smoothing import SmoothPower, check_phi_inequalities, check_phi_limits

P_VALUES = (2.0, 3.0, 4.0, 6.0, 8.0)
N_VALUES = (1.0, 2.0, 4.0, 8.0)


def test_known_value_outside_seam():
    # p = 4, n = 1, r = 2: quadratic continuation 6 + slope 4 + offset 1
    phi = SmoothPower(4.0, 1.0)
    assert phi.phi(np.array(2.0)) == pytest.approx(11.0, rel=1e-14)


def test_matches_power_inside():
    phi = SmoothPower(3.0, 2.0)
    r = np.linspace(-2.0, 2.0, 41)
    np.testing.assert_allclose(phi.phi(r), np.abs(r) ** 3, rtol=1e-14)


def test_seam_is_c2():
    for p in P_VALUES:
        for n in N_VALUES:
            phi = SmoothPower(p, n)
            eps = 1e-7 * n
            below, above = np.array(n - eps), np.array(n + eps)
            assert phi.phi(above) - phi.phi(below) == pytest.approx(0.0, abs=1e-5 * max(1.0, n**p))
            assert phi.phi_d1(above) - phi.phi_d1(below) == pytest.approx(0.0, abs=1e-5 * max(1.0, n ** (p - 1)) * p)
            assert phi.phi_d2(above) - phi.phi_d2(below) == pytest.approx(0.0, abs=1e-6 * max(1.0, n ** (p - 2)) * p * p)


def test_derivatives_at_origin():
    r0 = np.array(0.0)
    assert SmoothPower(4.0, 1.0).phi_d1(r0) == 0.0
    assert SmoothPower(4.0, 1.0).phi_d2(r0) == 0.0
    assert SmoothPower(2.0, 1.0).phi_d2(r0) == 2.0


def test_inequality_suite_all_cases():
    rng = np.random.default_rng(7)
    r = rng.uniform(-50.0, 50.0, 10_000)
    for p in P_VALUES:
        for n in N_VALUES:
            report = check_phi_inequalities(p, n, r)
            assert report["passed"], (p, n, report)


def test_domination_and_growth_limits():
    rng = np.random.default_rng(11)
    r = rng.uniform(-20.0, 20.0, 2_000)
    for p in P_VALUES:
        report = check_phi_limits(p, r, N_VALUES)
        assert report["passed"], (p, report)


@settings(max_examples=200, deadline=None)
@given(
    p=st.sampled_from(P_VALUES),
    n=st.sampled_from(N_VALUES),
    r=st.floats(min_value=-100.0, max_value=100.0, allow_nan=False),
)
def test_pointwise_properties(p, n, r):
    phi = SmoothPower(p, n)
    r = np.array(r)
    val, d1, d2 = phi.phi(r), phi.phi_d1(r), phi.phi_d2(r)
    tol = 1e-10 * max(1.0, abs(val))
    # evenness, nonnegativity, convexity, domination by |r|^p
    assert phi.phi(-r) == val
    assert val >= 0.0
    assert d2 >= -1e-12
    assert val <= np.abs(r) ** p + tol
    # (a) |r phi'| <= p phi
    assert abs(r * d1) <= p * val + tol
    # (b) r^2 phi'' <= p(p-1) phi
    assert r**2 * d2 <= p * (p - 1) * val + tol
    # (c) phi'^2 <= 4 p phi'' phi
    assert d1**2 <= 4.0 * p * d2 * val + tol * max(1.0, abs(d2))


def test_bitwise_exact_once_level_clears_samples():
    r = np.linspace(-3.0, 3.0, 101)
    phi = SmoothPower(5.0, 4.0)
    assert np.array_equal(phi.phi(r), np.abs(r) ** 5.0)


def test_rejects_bad_parameters():
    with pytest.raises(ValueError):
        SmoothPower(1.5, 1.0)
    with pytest.raises(ValueError):
        SmoothPower(4.0, 0.0)
