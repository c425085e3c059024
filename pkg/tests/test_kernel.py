import math

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from choquard.errors import DomainError, SingularityError
from choquard.kernel import (
    BallSpec,
    Dimension,
    RadialGrid,
    RadialProfile,
    green_pointwise,
    green_radial_avg,
    lambda_of,
    moments,
    newton_kernel,
    sphere_area,
    u_potential,
    v_potential,
)
from choquard.verify import angular_average_3d


def constant_profile(n, big_r, c=1.0, nodes=2001):
    r = np.linspace(0.0, big_r, nodes)
    return RadialProfile.from_arrays(r, np.full_like(r, c), BallSpec(Dimension(n), big_r),
                                     np.zeros_like(r))


def test_dimension_validation():
    with pytest.raises(DomainError, match=">= 3"):
        Dimension(2)
    with pytest.raises(DomainError):
        Dimension(3.5)
    assert Dimension(4.0).n == 4


def test_ballspec():
    ball = BallSpec(Dimension(3), 2.0)
    assert ball.image_factor == pytest.approx(0.5)
    inf = BallSpec(3, math.inf)
    assert inf.whole_space and inf.image_factor == 0.0
    with pytest.raises(DomainError):
        BallSpec(3, 0.0)


def test_sphere_area():
    assert sphere_area(3) == pytest.approx(4 * math.pi, rel=1e-15)
    assert sphere_area(4) == pytest.approx(2 * math.pi ** 2, rel=1e-15)
    assert sphere_area(5) == pytest.approx(8 * math.pi ** 2 / 3, rel=1e-15)


def test_newton_kernel_uses_larger_radius():
    assert newton_kernel(1.0, 2.0, 3) == pytest.approx(0.5)
    assert newton_kernel(2.0, 1.0, 3) == pytest.approx(0.5)
    assert newton_kernel(2.0, 2.0, 4) == pytest.approx(0.25)
    assert newton_kernel(0.0, 2.0, 3) == pytest.approx(0.5)


def test_newton_kernel_errors():
    with pytest.raises(SingularityError):
        newton_kernel(0.0, 0.0, 3)
    with pytest.raises(DomainError):
        newton_kernel(-1.0, 1.0, 3)


def test_green_radial_avg_values():
    ball = BallSpec(Dimension(3), 2.0)
    assert green_radial_avg(1.0, 1.5, ball) == pytest.approx(1.0 / 6.0)
    # vanishes when either sphere reaches the boundary
    assert green_radial_avg(1.0, 2.0, ball) == pytest.approx(0.0, abs=1e-15)
    assert green_radial_avg(2.0, 0.3, ball) == pytest.approx(0.0, abs=1e-15)
    with pytest.raises(DomainError):
        green_radial_avg(2.5, 1.0, ball)


def test_green_pointwise_symmetry_and_boundary(rng):
    ball = BallSpec(Dimension(3), 1.5)
    for _ in range(20):
        x = rng.uniform(-0.8, 0.8, 3)
        y = rng.uniform(-0.8, 0.8, 3)
        assert green_pointwise(x, y, ball) == pytest.approx(green_pointwise(y, x, ball), rel=1e-12)
        assert green_pointwise(x, y, ball) > 0
        z = rng.normal(size=3)
        z *= 1.5 / np.linalg.norm(z)
        assert abs(green_pointwise(x, z, ball)) < 1e-12
    assert green_pointwise(np.zeros(3), np.array([0.0, 0.0, 1.0]), ball) == pytest.approx(1 - 1 / 1.5)


def test_green_pointwise_errors():
    ball = BallSpec(Dimension(3), 1.0)
    with pytest.raises(SingularityError):
        green_pointwise(np.full(3, 0.1), np.full(3, 0.1), ball)
    with pytest.raises(DomainError):
        green_pointwise(np.array([2.0, 0, 0]), np.zeros(3), ball)
    with pytest.raises(DomainError):
        green_pointwise(np.zeros(2), np.zeros(2), ball)


@pytest.mark.parametrize("r,rho", [(0.3, 1.1), (1.7, 0.4), (1.0, 1.0005), (1.9, 1.95)])
def test_green_radial_avg_matches_angular_quadrature(r, rho):
    ball = BallSpec(Dimension(3), 2.0)
    assert green_radial_avg(r, rho, ball) == pytest.approx(angular_average_3d(r, rho, ball), abs=1e-10)


@given(st.floats(0.01, 5.0), st.floats(0.01, 5.0), st.integers(3, 8))
def test_newton_kernel_symmetric(r, rho, n):
    assert newton_kernel(r, rho, n) == newton_kernel(rho, r, n)


@given(st.floats(0.0, 3.0), st.floats(0.01, 3.0))
def test_green_radial_avg_nonnegative(r, rho):
    ball = BallSpec(Dimension(3), 3.0)
    assert green_radial_avg(r, rho, ball) >= 0.0


@pytest.mark.parametrize("n", [3, 4, 5, 6])
def test_moments_of_constant(n):
    big_r = 2.0
    phi = constant_profile(n, big_r, c=1.5)
    q, m = moments(phi)
    omega = sphere_area(n)
    r = phi.r
    np.testing.assert_allclose(q.values, omega * 2.25 * r ** 2 / 2, rtol=1e-13, atol=1e-15)
    np.testing.assert_allclose(m.values, omega * 2.25 * r ** n / n, rtol=1e-13, atol=1e-15)
    u = u_potential(phi)
    np.testing.assert_allclose(u.values, omega * 2.25 * r ** 2 * (0.5 - 1.0 / n), rtol=1e-12,
                               atol=1e-14)
    lam = lambda_of(phi)
    expected = omega * 2.25 * (big_r ** 2 / 2 - big_r ** 2 / n) - 1.0
    assert lam == pytest.approx(expected, rel=1e-12)


def test_v_potential_of_constant_n3():
    big_r = 2.0
    phi = constant_profile(3, big_r)
    v = v_potential(phi)
    r = phi.r
    # int_B (max(r, rho)^-1 - 1/R) dy for the indicator of B_R
    expected = 4 * math.pi * (r ** 2 / 3 + (big_r ** 2 - r ** 2) / 2 - big_r ** 2 / 3)
    np.testing.assert_allclose(v.values, expected, rtol=1e-11, atol=1e-12)
    assert v.values[-1] == pytest.approx(0.0, abs=1e-12)


def test_moments_are_nondecreasing(rng):
    r = np.linspace(0, 3, 501)
    vals = np.abs(np.sin(3 * r)) + 0.1
    phi = RadialProfile.from_arrays(r, vals, BallSpec(3, 3.0))
    q, m = moments(phi)
    assert np.all(np.diff(q.values) >= 0) and np.all(np.diff(m.values) >= 0)


def test_radial_grid_validation():
    with pytest.raises(DomainError):
        RadialGrid([0.0])
    with pytest.raises(DomainError):
        RadialGrid([0.0, 1.0, 1.0])
    with pytest.raises(DomainError):
        RadialGrid([-1.0, 1.0])


def test_profile_validation_and_evaluation():
    ball = BallSpec(3, 1.0)
    with pytest.raises(DomainError):
        RadialProfile.from_arrays([0, 0.5, 1], [1, 2], ball)
    with pytest.raises(DomainError):
        RadialProfile.from_arrays([0, 0.5, 1], [1, np.nan, 2], ball)
    phi = RadialProfile.from_function(lambda r: 1 - r ** 2, ball, np.linspace(0, 1, 11),
                                      lambda r: -2 * r)
    assert phi(0.35) == pytest.approx(1 - 0.35 ** 2, rel=1e-14)
    assert phi.slope(0.35) == pytest.approx(-0.7, rel=1e-13)
    assert phi(1.5) == 0.0
    assert phi(1.5, extend="hold") == pytest.approx(0.0, abs=1e-14)
    with pytest.raises(ValueError):
        phi.values[0] = 3.0


def test_profile_csv_round_trip(tmp_path):
    ball = BallSpec(3, 1.0)
    phi = RadialProfile.from_function(np.cos, ball, np.linspace(0, 1, 17))
    path = tmp_path / "p.csv"
    text = phi.to_csv(str(path))
    assert text.splitlines()[0] == "r,value"
    back = RadialProfile.from_csv(str(path), ball)
    np.testing.assert_array_equal(back.values, phi.values)
    np.testing.assert_array_equal(back.r, phi.r)
    with pytest.raises(DomainError):
        RadialProfile.from_csv("x,y\n0,1\n1,2\n", ball)
