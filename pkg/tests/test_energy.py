import math

import numpy as np
import pytest
from scipy.integrate import quad

from choquard.energy import (
    EnergyReport,
    dd_direct,
    dd_newton,
    energy,
    grad_norm_sq,
    h1_norm_sq,
    l2_norm_sq,
    nehari_scale,
    quadratic_form,
    smallest_eigenvalue,
)
from choquard.errors import DegenerateInputError, DomainError
from choquard.kernel import BallSpec, Dimension, RadialProfile, u_potential
from choquard.shooting import canonical_solution
from choquard.verify import random_profile


def sinc_profile(nodes=4001):
    ball = BallSpec(Dimension(3), math.pi)
    r = np.linspace(0.0, math.pi, nodes)
    val = np.sinc(r / math.pi)
    with np.errstate(invalid="ignore", divide="ignore"):
        d = np.where(r > 0, (r * np.cos(r) - np.sin(r)) / np.where(r > 0, r * r, 1.0), 0.0)
    return RadialProfile.from_arrays(r, val, ball, d)


def test_zero_profile():
    ball = BallSpec(3, 1.0)
    zero = RadialProfile.from_arrays(np.linspace(0, 1, 101), np.zeros(101), ball)
    assert h1_norm_sq(zero) == 0.0
    assert dd_newton(zero) == 0.0
    assert dd_direct(zero, panels=8) == 0.0
    assert energy(zero) == 0.0
    with pytest.raises(DegenerateInputError):
        nehari_scale(zero)


def test_h1_of_sinc_against_quad():
    phi = sinc_profile()

    def integrand(r):
        s = np.sinc(r / math.pi)
        d = (r * math.cos(r) - math.sin(r)) / (r * r) if r > 0 else 0.0
        return (d * d + s * s) * r * r

    exact = 4 * math.pi * quad(integrand, 0, math.pi, epsabs=1e-13, epsrel=1e-12, limit=200)[0]
    assert h1_norm_sq(phi) == pytest.approx(exact, rel=1e-8)
    assert grad_norm_sq(phi) + l2_norm_sq(phi) == pytest.approx(h1_norm_sq(phi), rel=1e-14)


def test_homogeneity(rng):
    phi = random_profile(rng, 3)
    two = phi.with_values(2 * phi.values, 2 * phi.derivative)
    assert h1_norm_sq(two) == pytest.approx(4 * h1_norm_sq(phi), rel=1e-13)
    assert dd_newton(two) == pytest.approx(16 * dd_newton(phi), rel=1e-13)
    t1, t2 = nehari_scale(phi).t_u, nehari_scale(two).t_u
    assert t2 == pytest.approx(t1 / 2, rel=1e-13)


@pytest.mark.parametrize("n", [3, 4, 5, 6])
def test_dd_routes_agree(n, rng):
    for _ in range(2):
        phi = random_profile(rng, n)
        assert dd_direct(phi) == pytest.approx(dd_newton(phi), rel=1e-7)


def test_dd_direct_swap_symmetric(rng):
    phi = random_profile(rng, 4)
    assert dd_direct(phi, swap=True) == pytest.approx(dd_direct(phi), rel=1e-13)


def test_dd_whole_space_matches_direct(rng):
    phi = random_profile(rng, 3)
    inf = BallSpec(3, math.inf)
    assert dd_direct(phi, inf) == pytest.approx(dd_newton(phi, inf), rel=1e-7)
    assert dd_newton(phi, inf) > dd_newton(phi)


def test_nehari_scale_report(rng):
    phi = random_profile(rng, 3)
    rep = nehari_scale(phi)
    assert rep.energy_at_projection == pytest.approx(rep.h1_norm_sq ** 2 / (4 * rep.dd))
    ts = np.linspace(0.2, 3.0, 57) * rep.t_u
    vals = [energy(phi.with_values(t * phi.values, t * phi.derivative)) for t in ts]
    assert max(vals) <= rep.energy_at_projection * (1 + 1e-12)
    assert abs(ts[int(np.argmax(vals))] - rep.t_u) <= (ts[1] - ts[0])
    back = EnergyReport.from_json(rep.to_json())
    assert back == rep
    assert nehari_scale(phi, source="direct_route").dd == pytest.approx(rep.dd, rel=1e-7)
    with pytest.raises(DomainError):
        nehari_scale(phi, source="nope")


def test_ground_state_is_on_nehari_manifold(gs3_5):
    rep = nehari_scale(gs3_5.profile)
    assert rep.t_u == pytest.approx(1.0, abs=1e-6)
    assert rep.energy_at_projection == pytest.approx(gs3_5.energy, rel=1e-8)
    assert energy(gs3_5.profile) == pytest.approx(gs3_5.energy, rel=1e-8)


def test_eigenvalue_free_ball():
    mu = smallest_eigenvalue(lambda r: np.zeros_like(r), math.pi, 3, nodes=4001)
    assert mu == pytest.approx(1.0, abs=1e-5)
    mu2 = smallest_eigenvalue(lambda r: np.full_like(r, 0.7), math.pi, 3, nodes=4001)
    assert mu2 == pytest.approx(mu + 0.7, abs=1e-10)


def test_eigenvalue_other_dimension():
    # first zero of J_1 over R squared, for the radial Dirichlet problem in 4D
    mu = smallest_eigenvalue(lambda r: np.zeros_like(r), 2.0, 4, nodes=4001)
    assert mu == pytest.approx((3.8317059702075125 / 2.0) ** 2, rel=1e-5)


def test_canonical_eigenvalue_and_form(gs3_5):
    sol = canonical_solution(gs3_5)
    pot = u_potential(sol.profile)
    assert smallest_eigenvalue(pot, sol.r0, 3) == pytest.approx(1.0, abs=1e-3)
    for k in (1, 3, 5):
        # trial functions vanishing at r0
        a, l2 = quadratic_form(pot, sol.r0, 3, lambda r: np.cos(k * math.pi * r / (2 * sol.r0)))
        assert a >= l2 * (1 - 1e-3)


def test_radial_operator_validation():
    with pytest.raises(DomainError):
        smallest_eigenvalue(lambda r: 0 * r, 1.0, 3, nodes=2)
