import math
import warnings

import numpy as np
import pytest

from choquard.errors import ConvergenceError, DomainError, NoPositiveLambda
from choquard.kernel import BallSpec, Dimension, lambda_of
from choquard.shooting import (
    CanonicalSolution,
    CrossesZero,
    Decays,
    Diverges,
    GroundState,
    Truncated,
    canonical_solution,
    default_scan,
    integrate_trajectory,
    lambda_from_crossing,
    pde_residual,
    rescale_to_ball,
    shifted_scan,
    solve_ball,
)


def test_scans_are_disjoint():
    a, b = default_scan(), shifted_scan()
    assert a.size == 60 and b.size == 60
    assert not set(a.tolist()) & set(b.tolist())
    assert np.all(np.diff(a) > 0) and np.all(np.diff(b) > 0)


def test_tiny_amplitude_crosses_at_free_zero():
    # U is negligible, so Phi ~ a sin(r) / r and the first zero is pi
    out = integrate_trajectory(1e-3, 3)
    assert isinstance(out, CrossesZero)
    assert out.r0 == pytest.approx(math.pi, rel=1e-4)
    assert out.state_at_r0.potential(3) < 1.0


def test_above_separatrix_diverges(gs3_inf):
    assert isinstance(integrate_trajectory(1.0, 3), Diverges)
    assert isinstance(integrate_trajectory(1.001 * gs3_inf.amplitude, 3), Diverges)


def test_crossing_below_separatrix():
    out = integrate_trajectory(0.3, 3)
    assert isinstance(out, CrossesZero)
    assert out.state_at_r0.phi == pytest.approx(0.0, abs=1e-9)
    assert out.profile.values[-1] == 0.0
    assert np.all(out.profile.values[:-1] > 0)
    assert out.state_at_r0.potential(3) > 1.0


def test_crossings_move_outward_with_amplitude():
    r0 = [integrate_trajectory(a, 3).r0 for a in (0.1, 0.2, 0.25, 0.3, 0.305)]
    assert np.all(np.diff(r0) > 0)


def test_rescale_reproduces_multiplier():
    out = integrate_trajectory(0.3, 3)
    sol = CanonicalSolution.from_crossing(out)
    lam = lambda_from_crossing(sol)
    gs = rescale_to_ball(sol)
    assert gs.lam == pytest.approx(lam)
    assert gs.ball.radius == pytest.approx(sol.r0 / math.sqrt(lam))
    assert lambda_of(gs.profile) == pytest.approx(lam, rel=1e-8)
    assert gs.central_value == pytest.approx(lam * 0.3, rel=1e-12)
    with pytest.raises(DomainError):
        rescale_to_ball(sol, radius=gs.ball.radius * 1.01)


def test_no_positive_lambda():
    out = integrate_trajectory(0.1, 3)
    sol = CanonicalSolution.from_crossing(out)
    with pytest.raises(NoPositiveLambda):
        lambda_from_crossing(sol)


def test_invalid_amplitude():
    with pytest.raises(DomainError):
        integrate_trajectory(-1.0, 3)


@pytest.mark.parametrize("radius", [2.0, 5.0, 10.0])
def test_ball_solution_properties(radius):
    gs = solve_ball(BallSpec(Dimension(3), radius))
    phi = gs.profile
    assert gs.lam > 0
    assert phi.values[-1] == 0.0
    assert np.all(phi.values[:-1] > 0)
    assert np.all(np.diff(phi.values) < 0)
    assert lambda_of(phi) == pytest.approx(gs.lam, rel=1e-8)
    r, res = pde_residual(gs)
    assert np.max(np.abs(res)) < 1e-6 * phi.values[0]
    assert gs.energy == pytest.approx(0.25 * gs.h1_norm_sq)
    assert gs.diagnostics["method"] == "shooting"


def test_ball_r5_frozen(gs3_5):
    # values computed by this solver and cross-checked against the 3D grid oracle (0.03%)
    assert gs3_5.lam == pytest.approx(1.8909, abs=1e-4)
    assert gs3_5.energy == pytest.approx(2.06882, abs=1e-5)


def test_collocation_agrees_with_shooting(gs3_5):
    gc = solve_ball(gs3_5.ball, method="collocation")
    assert gc.diagnostics["method"] == "collocation"
    assert gc.lam == pytest.approx(gs3_5.lam, rel=1e-6)
    assert gc.energy == pytest.approx(gs3_5.energy, rel=1e-6)
    assert gc.amplitude == pytest.approx(gs3_5.amplitude, rel=1e-6)


def test_large_radius_falls_back_to_collocation():
    gs = solve_ball(BallSpec(3, 16.0))
    assert gs.diagnostics["method"] == "collocation"
    assert gs.ball.radius == 16.0
    assert np.all(gs.profile.values[:-1] > 0)


def test_level_decreases_with_radius(gs3_5, gs3_inf):
    g2 = solve_ball(BallSpec(3, 2.0))
    g10 = solve_ball(BallSpec(3, 10.0))
    assert g2.energy > gs3_5.energy > g10.energy > gs3_inf.energy


def test_uniqueness_across_scans(ball3_5, gs3_5):
    other = solve_ball(ball3_5, scan=shifted_scan())
    assert other.amplitude == pytest.approx(gs3_5.amplitude, rel=1e-7)
    assert other.energy == pytest.approx(gs3_5.energy, rel=1e-9)


def test_canonical_solution_available(gs3_5):
    sol = canonical_solution(gs3_5)
    assert sol.r0 == pytest.approx(gs3_5.ball.radius * math.sqrt(gs3_5.lam), rel=1e-9)
    gc = solve_ball(gs3_5.ball, method="collocation")
    with pytest.raises(DomainError):
        canonical_solution(gc)


def test_unknown_method(ball3_5):
    with pytest.raises(DomainError):
        solve_ball(ball3_5, method="newton")


def test_whole_space_frozen(gs3_inf):
    assert gs3_inf.ball.whole_space
    assert gs3_inf.lam == pytest.approx(0.93832284, rel=1e-6)
    assert gs3_inf.energy == pytest.approx(1.16844323, rel=1e-6)
    assert math.sqrt(gs3_inf.h1_norm_sq) == pytest.approx(2.1619, abs=1e-4)
    assert gs3_inf.diagnostics["tail_relative"] < 1e-4
    assert isinstance(gs3_inf.diagnostics["outcome"], Decays)
    v = gs3_inf.profile.values
    assert np.all(v > 0) and np.all(np.diff(v) < 0)


def test_whole_space_tail_evaluation(gs3_inf):
    end = gs3_inf.profile.r[-1]
    val, slope = gs3_inf.evaluate(np.array([end, end + 1.0, end + 5.0]))
    assert np.all(np.diff(val) < 0) and np.all(val > 0)
    assert np.all(slope < 0)


def test_dimension_six_has_no_ball_solution():
    with pytest.raises(ConvergenceError) as info:
        solve_ball(BallSpec(6, 2.0))
    assert "no positive ground state" in str(info.value)


def test_dimension_seven_warns_then_fails():
    with pytest.warns(UserWarning, match="N=3..6"):
        with pytest.raises(ConvergenceError):
            solve_ball(BallSpec(7, 2.0))


@pytest.mark.parametrize("n", [4, 5])
def test_higher_dimensions(n):
    gs = solve_ball(BallSpec(n, 2.0))
    assert gs.uniqueness_guaranteed
    r, res = pde_residual(gs)
    assert np.max(np.abs(res)) < 1e-6 * gs.central_value


def test_json_round_trip(gs3_5, gs3_inf, tmp_path):
    for gs in (gs3_5, gs3_inf):
        back = GroundState.from_json(gs.to_json())
        assert back.lam == gs.lam and back.energy == gs.energy
        assert back.ball.radius == gs.ball.radius
        np.testing.assert_array_equal(back.profile.values, gs.profile.values)
    assert '"radius": "inf"' in gs3_inf.to_json()


def test_truncated_outcome_near_separatrix(gs3_inf):
    # just below the separatrix the trajectory lingers before crossing
    out = integrate_trajectory(gs3_inf.amplitude, 3, r_max=5.0)
    assert isinstance(out, Truncated)
    assert out.state.phi > 0
