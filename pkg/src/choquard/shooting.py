"""Shooting solver for the canonical radial equation.

Every positive radial ground state on a ball is, after the scaling
phi(x) = lam * Phi(sqrt(lam) x), a positive solution of the parameter-free
canonical problem

    Phi'' + (N-1)/r Phi' = (U_Phi(r) - 1) Phi,   Phi'(0) = 0,  Phi(0) = a,

stopped at its first zero r0.  Substituting the scaling into the definition of
lambda gives lam = 1 / (U_Phi(r0) - 1) and ball radius R = r0 / sqrt(lam), so
a ball problem is a one-parameter search over the central amplitude a.  The
whole-space ground state sits on the separatrix between trajectories that
cross zero and trajectories that turn upward.
"""

from __future__ import annotations

import json
import logging
import math
import warnings
from dataclasses import dataclass, field
from functools import lru_cache
from typing import Optional, Sequence, Union

import numpy as np
from scipy.integrate import solve_bvp
from scipy.optimize import brentq

from . import _backend
from .energy import h1_norm_sq
from .errors import (
    BracketError,
    ConvergenceError,
    DomainError,
    IntegrationError,
    NoPositiveLambda,
)
from .kernel import (
    BallSpec,
    Dimension,
    RadialGrid,
    RadialProfile,
    as_dimension,
    lambda_of,
    sphere_area,
    u_potential,
)

log = logging.getLogger(__name__)

CROSSED, DIVERGED, REACHED_RMAX, PASSED_RADIUS = 1, 2, 0, 3


@dataclass(frozen=True)
class Tolerances:
    """Numerical controls for shooting and for sampling the returned profiles.

    ``grid_spacing`` and ``min_nodes`` fix the uniform grid on which returned
    profiles are stored; ``tail`` is the relative level at which the
    whole-space profile is truncated.
    """

    ode: float = 1e-10
    event: float = 1e-12
    bisect: float = 1e-10
    decay: float = 1e-8
    r_max: float = 200.0
    r_start: float = 1e-6
    atol_factor: float = 1e-6
    max_steps: int = 2_000_000
    grid_spacing: float = 1e-3
    min_nodes: int = 2001
    tail: float = 1e-7
    lambda_check: float = 1e-6


DEFAULT_TOL = Tolerances()


def default_scan(points: int = 60) -> np.ndarray:
    return np.geomspace(1e-3, 1e3, points)


def shifted_scan(points: int = 60) -> np.ndarray:
    """Geometric midpoints of :func:`default_scan`; shares no amplitude with it."""
    grid = default_scan(points + 1)
    return np.sqrt(grid[:-1] * grid[1:])


@dataclass(frozen=True)
class ShootingState:
    r: float
    phi: float
    dphi: float
    q: float
    m: float

    def potential(self, n: int) -> float:
        return self.q - self.r ** (2 - n) * self.m


def _quintic(s, x, f, d1, d2):
    """Quintic Hermite interpolation of (f, f', f'') data; returns value and slope."""
    s = np.asarray(s, dtype=np.float64)
    i = np.clip(np.searchsorted(x, s, side="right") - 1, 0, x.size - 2)
    h = x[i + 1] - x[i]
    t = (s - x[i]) / h
    t2, t3 = t * t, t * t * t
    t4, t5 = t3 * t, t3 * t2
    h00 = 1 - 10 * t3 + 15 * t4 - 6 * t5
    h01 = 10 * t3 - 15 * t4 + 6 * t5
    h10 = t - 6 * t3 + 8 * t4 - 3 * t5
    h11 = -4 * t3 + 7 * t4 - 3 * t5
    h20 = 0.5 * t2 - 1.5 * t3 + 1.5 * t4 - 0.5 * t5
    h21 = 0.5 * t3 - t4 + 0.5 * t5
    val = (f[i] * h00 + f[i + 1] * h01 + h * (d1[i] * h10 + d1[i + 1] * h11)
           + h * h * (d2[i] * h20 + d2[i + 1] * h21))
    g00 = (-30 * t2 + 60 * t3 - 30 * t4) / h
    g10 = 1 - 18 * t2 + 32 * t3 - 15 * t4
    g11 = -12 * t2 + 28 * t3 - 15 * t4
    g20 = h * (t - 4.5 * t2 + 6 * t3 - 2.5 * t4)
    g21 = h * (1.5 * t2 - 4 * t3 + 2.5 * t4)
    slope = ((f[i] - f[i + 1]) * g00 + d1[i] * g10 + d1[i + 1] * g11
             + d2[i] * g20 + d2[i + 1] * g21)
    return val, slope


@dataclass(frozen=True, eq=False)
class Trajectory:
    """Accepted steps of one canonical trajectory: nodes r, states y, derivatives dy."""

    amplitude: float
    n: int
    status: int
    r: np.ndarray
    y: np.ndarray
    dy: np.ndarray

    def state(self, i: int = -1) -> ShootingState:
        phi, dphi, q, m = self.y[i]
        return ShootingState(float(self.r[i]), float(phi), float(dphi), float(q), float(m))

    @property
    def end(self) -> ShootingState:
        return self.state(-1)

    def potential(self) -> np.ndarray:
        return self.y[:, 2] - self.r ** (2 - self.n) * self.y[:, 3]

    def phi(self, s):
        """Value and slope of Phi at canonical radii s (Taylor start below the first node)."""
        s = np.asarray(s, dtype=np.float64)
        val, slope = _quintic(s, self.r, self.y[:, 0], self.y[:, 1], self.dy[:, 1])
        near = s < self.r[0]
        a, n = self.amplitude, self.n
        val = np.where(near, a * (1.0 - s * s / (2.0 * n)), val)
        slope = np.where(near, -a * s / n, slope)
        return val, slope

    def moment_q(self, s):
        """Cubic Hermite interpolation of the cumulative moment q."""
        s = np.asarray(s, dtype=np.float64)
        i = np.clip(np.searchsorted(self.r, s, side="right") - 1, 0, self.r.size - 2)
        h = self.r[i + 1] - self.r[i]
        t = (s - self.r[i]) / h
        q, dq = self.y[:, 2], self.dy[:, 2]
        return (q[i] * (2 * t ** 3 - 3 * t ** 2 + 1) + q[i + 1] * (-2 * t ** 3 + 3 * t ** 2)
                + h * dq[i] * (t ** 3 - 2 * t ** 2 + t) + h * dq[i + 1] * (t ** 3 - t ** 2))


@dataclass(frozen=True, eq=False)
class CrossesZero:
    r0: float
    state_at_r0: ShootingState
    profile: RadialProfile
    trajectory: Trajectory


@dataclass(frozen=True, eq=False)
class Diverges:
    r_div: float
    trajectory: Trajectory


@dataclass(frozen=True, eq=False)
class Decays:
    profile: RadialProfile
    tail_value: float
    trajectory: Optional[Trajectory] = None


@dataclass(frozen=True, eq=False)
class Truncated:
    """Reached ``r_max`` still positive without meeting the decay criterion."""

    profile: RadialProfile
    state: ShootingState
    trajectory: Trajectory


TrajectoryOutcome = Union[CrossesZero, Diverges, Decays, Truncated]


def _trajectory(a: float, n: int, r_max: float, tol: Tolerances,
                stop_radius: float = 0.0) -> Trajectory:
    if not a > 0:
        raise DomainError("amplitude must be positive")
    status, r, y, dy = _backend.shoot(
        float(a), int(n), sphere_area(n), tol.r_start, float(r_max), tol.ode,
        tol.atol_factor * tol.ode * a, tol.event, tol.decay * a, float(stop_radius),
        int(tol.max_steps))
    traj = Trajectory(float(a), int(n), int(status), r, y, dy)
    if status < 0:
        reason = "step size underflow" if status == -1 else "step budget exhausted"
        raise IntegrationError(f"integration failed at r={r[-1]:.6g}: {reason}", traj.end)
    return traj


def _uniform(end: float, tol: Tolerances) -> np.ndarray:
    count = max(tol.min_nodes, int(math.ceil(end / tol.grid_spacing)) + 1)
    return np.linspace(0.0, end, count)


def _canonical_profile(traj: Trajectory, end: float, tol: Tolerances,
                       zero_end: bool = False) -> RadialProfile:
    s = _uniform(end, tol)
    val, slope = traj.phi(s)
    if zero_end:
        val[-1] = 0.0
    ball = BallSpec(Dimension(traj.n), end)
    return RadialProfile(RadialGrid(s), val, ball, slope)


def integrate_trajectory(amplitude: float, dim, r_max: Optional[float] = None,
                         tol: Tolerances = DEFAULT_TOL) -> TrajectoryOutcome:
    """Integrate the canonical equation from Phi(0) = amplitude and classify the result."""
    n = as_dimension(dim).n
    r_max = tol.r_max if r_max is None else r_max
    traj = _trajectory(amplitude, n, r_max, tol)
    end = traj.end
    if traj.status == CROSSED:
        return CrossesZero(end.r, end, _canonical_profile(traj, end.r, tol, zero_end=True), traj)
    if traj.status == DIVERGED:
        return Diverges(end.r, traj)
    profile = _canonical_profile(traj, end.r, tol)
    if 0 < end.phi < tol.decay * amplitude and end.dphi < 0:
        return Decays(profile, end.phi, traj)
    return Truncated(profile, end, traj)


# ------------------------------------------------------------------ ball problem


@dataclass(frozen=True, eq=False)
class CanonicalSolution:
    profile: RadialProfile
    r0: float
    u_at_r0: float
    amplitude: float
    trajectory: Optional[Trajectory] = None

    @classmethod
    def from_crossing(cls, outcome: CrossesZero) -> "CanonicalSolution":
        n = outcome.trajectory.n
        return cls(outcome.profile, outcome.r0, outcome.state_at_r0.potential(n),
                   outcome.trajectory.amplitude, outcome.trajectory)

    def evaluate(self, s):
        if self.trajectory is not None:
            return self.trajectory.phi(s)
        return self.profile(s), self.profile.slope(s)


@dataclass(frozen=True, eq=False)
class GroundState:
    """A solved ball (or whole-space, ``ball.radius == inf``) ground state.

    ``amplitude`` is the canonical shooting amplitude Phi(0) = phi(0) / lam.
    """

    profile: RadialProfile
    ball: BallSpec
    lam: float
    energy: float
    h1_norm_sq: float
    amplitude: float
    diagnostics: dict = field(default_factory=dict)

    @property
    def n(self) -> int:
        return self.ball.n

    @property
    def central_value(self) -> float:
        return float(self.profile.values[0])

    @property
    def uniqueness_guaranteed(self) -> bool:
        return 3 <= self.n <= 6

    def evaluate(self, r):
        """Values and slopes at r; zero outside a ball, exponential tail in whole space."""
        r = np.asarray(r, dtype=np.float64)
        val = self.profile(r)
        slope = self.profile.slope(r)
        if self.ball.whole_space:
            end = self.profile.r[-1]
            v_end, d_end = self.profile.values[-1], self.profile.node_slopes()[-1]
            rate = d_end / v_end if v_end > 0 else -1.0
            tail = r > end
            val = np.where(tail, v_end * np.exp(rate * (r - end)), val)
            slope = np.where(tail, rate * val, slope)
        return val, slope

    def to_dict(self) -> dict:
        return {
            "dim": self.n,
            "radius": "inf" if self.ball.whole_space else self.ball.radius,
            "lambda": self.lam,
            "energy": self.energy,
            "h1_norm_sq": self.h1_norm_sq,
            "amplitude": self.amplitude,
            "profile": [[float(r), float(v)] for r, v in zip(self.profile.r, self.profile.values)],
        }

    def to_json(self) -> str:
        return json.dumps(self.to_dict())

    @classmethod
    def from_json(cls, text: str) -> "GroundState":
        data = json.loads(text)
        radius = math.inf if data["radius"] == "inf" else float(data["radius"])
        ball = BallSpec(Dimension(data["dim"]), radius)
        rv = np.asarray(data["profile"], dtype=np.float64)
        profile = RadialProfile(RadialGrid(rv[:, 0]), rv[:, 1], ball)
        return cls(profile, ball, data["lambda"], data["energy"], data["h1_norm_sq"],
                   data["amplitude"])


def lambda_from_crossing(sol: CanonicalSolution) -> float:
    """Multiplier 1 / (U(r0) - 1) of the ball state obtained by rescaling a crossing."""
    if not sol.u_at_r0 > 1.0:
        raise NoPositiveLambda(
            f"U(r0) = {sol.u_at_r0:.6g} <= 1: crossing cannot be rescaled to a ground state")
    return 1.0 / (sol.u_at_r0 - 1.0)


def _finish(profile: RadialProfile, ball: BallSpec, lam: float, amplitude: float,
            tol: Tolerances, **diagnostics) -> GroundState:
    norm = h1_norm_sq(profile)
    check = lambda_of(profile, ball)
    diagnostics["lambda_check"] = abs(check - lam) / lam
    diagnostics["uniqueness_guaranteed"] = 3 <= ball.n <= 6
    if diagnostics["lambda_check"] > tol.lambda_check:
        raise ConvergenceError(
            f"closed-form multiplier {lam:.12g} disagrees with lambda(phi) = {check:.12g}",
            diagnostics)
    return GroundState(profile, ball, lam, 0.25 * norm, norm, amplitude, diagnostics)


def rescale_to_ball(sol: CanonicalSolution, radius: Optional[float] = None,
                    tol: Tolerances = DEFAULT_TOL) -> GroundState:
    """Map a canonical crossing to the ball state phi(r) = lam Phi(sqrt(lam) r) on B_(r0/sqrt(lam))."""
    lam = lambda_from_crossing(sol)
    root = math.sqrt(lam)
    natural = sol.r0 / root
    if radius is None:
        radius = natural
    elif abs(radius - natural) > 1e-8 * radius:
        raise DomainError(f"crossing rescales to R={natural:.12g}, not {radius:.12g}")
    n = sol.profile.n
    ball = BallSpec(Dimension(n), radius)
    r = _uniform(radius, tol)
    s = np.minimum(root * r, sol.r0)
    val, slope = sol.evaluate(s)
    val = lam * val
    val[-1] = 0.0
    profile = RadialProfile(RadialGrid(r), val, ball, lam * root * slope)
    return _finish(profile, ball, lam, sol.amplitude, tol, method="shooting", r0=sol.r0,
                   u_at_r0=sol.u_at_r0)


def _scaled_radius(a: float, n: int, target: float, tol: Tolerances):
    """Ball radius R(a) reached by the trajectory from a, classified against target.

    Returns (side, R, trajectory) with side 'below' or 'above'.  Crossings with
    U(r0) <= 1 count as R = 0; trajectories that turn upward count as R = inf.
    """
    r_max = max(1e4, 100.0 * target)
    traj = _trajectory(a, n, r_max, tol, stop_radius=target)
    if traj.status == CROSSED:
        u0 = traj.end.potential(n)
        radius = traj.end.r * math.sqrt(u0 - 1.0) if u0 > 1.0 else 0.0
        return ("below" if radius < target else "above"), radius, traj
    if traj.status in (DIVERGED, PASSED_RADIUS):
        return "above", math.inf, traj
    # still positive at r_max: U has crept up to 1 along a slowly decaying tail
    if traj.end.potential(n) <= 1.0:
        return "below", 0.0, traj
    return "above", math.inf, traj


def _scan(amplitudes, classify):
    """First adjacent pair (below, above) along the scan, plus every sample taken."""
    samples = []
    prev = None
    for a in amplitudes:
        side, value, traj = classify(float(a))
        samples.append((float(a), side, value))
        if prev is not None and prev[1] == "below" and side == "above":
            return prev, (float(a), side, value, traj), samples
        prev = (float(a), side, value, traj)
    raise BracketError(f"no bracket in amplitude scan [{amplitudes[0]:.3g}, {amplitudes[-1]:.3g}]")


def _monotone(samples) -> bool:
    vals = [v for _, _, v in samples if np.isfinite(v) and v > 0]
    return bool(np.all(np.diff(vals) > 0)) if len(vals) > 1 else True


def solve_ball(ball: BallSpec, tol: Tolerances = DEFAULT_TOL,
               scan: Optional[Sequence[float]] = None, method: str = "auto") -> GroundState:
    """Positive radial ground state of the Choquard equation on B_R.

    Scan the amplitude grid for a sign change of R(a) - R, bisect until both
    ends are genuine crossings, then polish with Brent's method.  Near the
    separatrix R(a) grows like -log(a_sep - a)/2, so radii beyond roughly 12
    are not resolvable in double precision; there ``method="auto"`` hands the
    best shooting bracket's whole-space limit to a collocation solve of the
    same radial system.
    """
    if ball.whole_space:
        return solve_whole_space(ball.dim, tol, scan)
    n, target = ball.n, ball.radius
    if n > 6:
        warnings.warn(f"uniqueness is only guaranteed for N=3..6 (N={n})", stacklevel=2)
    if method not in ("auto", "shooting", "collocation"):
        raise DomainError(f"unknown method {method!r}")
    if method == "collocation":
        return _solve_ball_collocation(ball, tol)

    amplitudes = default_scan() if scan is None else np.asarray(scan, dtype=np.float64)

    def classify(a):
        return _scaled_radius(a, n, target, tol)

    lo, hi, samples = _scan(amplitudes, classify)
    a_lo, a_hi = lo[0], hi[0]
    hi_crossing = np.isfinite(hi[2])
    steps = 0
    while not hi_crossing:
        mid = 0.5 * (a_lo + a_hi)
        if not a_lo < mid < a_hi:
            break
        side, value, _ = classify(mid)
        steps += 1
        if side == "below":
            a_lo = mid
        else:
            a_hi, hi_crossing = mid, bool(np.isfinite(value))
    diagnostics = {"scan_monotone": _monotone(samples), "bisection_steps": steps}

    if not hi_crossing:
        diagnostics.update(bracket=(a_lo, a_hi), best_radius=classify(a_lo)[1])
        if diagnostics["best_radius"] == 0.0:
            raise ConvergenceError(
                "bracket collapsed onto the amplitude where U(r0) -> 1 and r0 -> inf; "
                "no crossing with U(r0) > 1, so no positive ground state was found",
                diagnostics)
        if method == "shooting":
            raise ConvergenceError(
                f"amplitude bracket collapsed at R(a)={diagnostics['best_radius']:.6g} "
                f"< {target:.6g}", diagnostics)
        log.info("R=%g beyond shooting resolution; switching to collocation", target)
        return _solve_ball_collocation(ball, tol, **diagnostics)

    def mismatch(a):
        return classify(a)[1] - target

    a_star = brentq(mismatch, a_lo, a_hi, xtol=1e-15 * a_hi, rtol=1e-15, maxiter=200)
    side, radius, traj = classify(a_star)
    if not math.isfinite(radius):
        raise ConvergenceError("polished amplitude does not cross zero", diagnostics)
    end = traj.end
    sol = CanonicalSolution(_canonical_profile(traj, end.r, tol, zero_end=True), end.r,
                            end.potential(n), a_star, traj)
    if abs(radius - target) > 1e-9 * target:
        diagnostics.update(bracket=(a_lo, a_hi), best_radius=radius)
        if method == "shooting":
            raise ConvergenceError(f"shooting reached R={radius:.15g}, target {target:.15g}",
                                   diagnostics)
        log.info("R=%g not resolved by shooting; switching to collocation", target)
        return _solve_ball_collocation(ball, tol, **diagnostics)
    gs = rescale_to_ball(sol, radius=target, tol=tol)
    gs.diagnostics.update(diagnostics)
    gs.diagnostics["canonical"] = sol
    return gs


def canonical_solution(gs: GroundState) -> CanonicalSolution:
    """The canonical crossing underlying a shooting-solved ball state."""
    sol = gs.diagnostics.get("canonical")
    if sol is None:
        raise DomainError("ground state was not produced by the shooting path")
    return sol


# ---------------------------------------------------------------- whole space


def _separatrix_side(a: float, n: int, tol: Tolerances):
    traj = _trajectory(a, n, tol.r_max, tol)
    if traj.status == CROSSED:
        return "below", traj.end.r, traj
    if traj.status == DIVERGED:
        return "above", traj.end.r, traj
    end = traj.end
    if 0 < end.phi < tol.decay * a and end.dphi < 0:
        return "decays", end.r, traj
    return ("below" if end.potential(n) <= 1.0 else "above"), end.r, traj


def solve_whole_space(dim, tol: Tolerances = DEFAULT_TOL,
                      scan: Optional[Sequence[float]] = None) -> GroundState:
    """Whole-space ground state from the crossing/diverging separatrix.

    The bracket is bisected to adjacent floating-point amplitudes.  The two
    bracketing trajectories agree up to the radius where the unstable mode,
    seeded by the rounding of a, reaches the size of the solution; the profile
    is their mean, truncated there or where it falls below ``tol.tail`` times
    the amplitude, whichever is first.  The multiplier uses the limit
    U(inf) = q(inf), read off at the truncation radius.
    """
    n = as_dimension(dim).n
    amplitudes = default_scan() if scan is None else np.asarray(scan, dtype=np.float64)

    def classify(a):
        side, r_end, traj = _separatrix_side(a, n, tol)
        return ("above" if side == "decays" else side), r_end, traj

    lo, hi, samples = _scan(amplitudes, classify)
    a_lo, a_hi, t_lo, t_hi = lo[0], hi[0], lo[3], hi[3]
    for _ in range(2000):
        mid = 0.5 * (a_lo + a_hi)
        if not a_lo < mid < a_hi:
            break
        side, _, traj = _separatrix_side(mid, n, tol)
        if side == "below":
            a_lo, t_lo = mid, traj
        elif side == "above":
            a_hi, t_hi = mid, traj
        else:
            a_lo = a_hi = mid
            t_lo = t_hi = traj
            break

    a_sep = 0.5 * (a_lo + a_hi)
    end = min(t_lo.r[-1], t_hi.r[-1])
    s = np.arange(0.0, end, 1e-3 * min(1.0, 1.0 / math.sqrt(a_sep)))
    v_lo, d_lo = t_lo.phi(s)
    v_hi, d_hi = t_hi.phi(s)
    mean = 0.5 * (v_lo + v_hi)
    split = np.nonzero(np.abs(v_lo - v_hi) > 1e-3 * np.abs(mean))[0]
    low = np.nonzero(mean < tol.tail * a_sep)[0]
    cut = min(split[0] if split.size else s.size - 1, low[0] if low.size else s.size - 1)
    r_cut = float(s[cut])
    tail_value = float(mean[cut])
    diagnostics = {
        "bracket": (a_lo, a_hi),
        "r_cut_canonical": r_cut,
        "tail_value": tail_value,
        "tail_relative": tail_value / a_sep,
        "scan_monotone": _monotone(samples),
    }
    if tail_value > 1e-4 * a_sep:
        raise ConvergenceError("separatrix not resolved: no exponential decay before the "
                               "bracketing trajectories split", diagnostics)

    q_inf = 0.5 * float(t_lo.moment_q(r_cut) + t_hi.moment_q(r_cut))
    diagnostics["q_inf"] = q_inf
    if not q_inf > 1.0 + 1e-6:
        raise ConvergenceError("separatrix plateau U(inf) does not exceed 1", diagnostics)
    lam = 1.0 / (q_inf - 1.0)
    root = math.sqrt(lam)

    canon_grid = _uniform(r_cut, tol)
    c_lo, cd_lo = t_lo.phi(canon_grid)
    c_hi, cd_hi = t_hi.phi(canon_grid)
    canon = RadialProfile(RadialGrid(canon_grid), 0.5 * (c_lo + c_hi),
                          BallSpec(Dimension(n), math.inf), 0.5 * (cd_lo + cd_hi))
    diagnostics["outcome"] = Decays(canon, tail_value)

    ball = BallSpec(Dimension(n), math.inf)
    r = _uniform(r_cut / root, tol)
    val_lo, sl_lo = t_lo.phi(root * r)
    val_hi, sl_hi = t_hi.phi(root * r)
    profile = RadialProfile(RadialGrid(r), lam * 0.5 * (val_lo + val_hi), ball,
                            lam * root * 0.5 * (sl_lo + sl_hi))
    return _finish(profile, ball, lam, a_sep, tol, method="separatrix", **diagnostics)


@lru_cache(maxsize=16)
def whole_space_ground_state(n: int, tol: Tolerances = DEFAULT_TOL) -> GroundState:
    """Cached :func:`solve_whole_space`."""
    return solve_whole_space(Dimension(n), tol)


# ------------------------------------------------------------ collocation path


def _solve_ball_collocation(ball: BallSpec, tol: Tolerances, **diagnostics) -> GroundState:
    """Collocation solve of the ball system with lambda as an unknown parameter.

    Unknowns (phi, phi', q, m) on [0, R] with phi'(0) = q(0) = m(0) = 0,
    phi(R) = 0 and lambda = q(R) - R^(2-N) m(R) - 1.  Seeded from the
    whole-space ground state shifted to vanish at R.
    """
    n, big_r = ball.n, ball.radius
    omega = sphere_area(n)
    seed = whole_space_ground_state(n, tol)
    x = np.linspace(0.0, big_r, 801)
    val, slope = seed.evaluate(x)
    edge = seed.evaluate(np.array([big_r]))[0][0]
    phi0 = np.maximum(val - edge, 0.0)
    seed_profile = RadialProfile(RadialGrid(x), phi0, ball, slope)
    from .kernel import moments

    q0, m0 = moments(seed_profile)
    lam0 = q0.values[-1] - ball.image_factor * m0.values[-1] - 1.0
    y0 = np.vstack([phi0, slope, q0.values, m0.values])

    sing = np.zeros((4, 4))
    sing[1, 1] = -(n - 1)

    def fun(r, y, p):
        phi, _, q, m = y
        inv = np.zeros_like(r)
        np.power(r, 2 - n, out=inv, where=r > 0)
        u = q - inv * m
        return np.vstack([y[1], (u - p[0]) * phi, omega * r * phi ** 2,
                          omega * r ** (n - 1) * phi ** 2])

    def bc(ya, yb, p):
        return np.array([ya[1], ya[2], ya[3], yb[0],
                         p[0] - (yb[2] - ball.image_factor * yb[3] - 1.0)])

    res = solve_bvp(fun, bc, x, y0, p=[lam0], S=sing, tol=1e-9, max_nodes=400_000)
    if not res.success:
        raise ConvergenceError(f"collocation failed: {res.message}", diagnostics)
    lam = float(res.p[0])
    r = _uniform(big_r, tol)
    yy = res.sol(r)
    vals = yy[0].copy()
    vals[-1] = 0.0
    profile = RadialProfile(RadialGrid(r), vals, ball, yy[1])
    if lam <= 0 or np.any(vals[:-1] <= 0):
        raise ConvergenceError("collocation converged to a non-positive state", diagnostics)
    return _finish(profile, ball, lam, float(vals[0] / lam), tol, method="collocation",
                   bvp_max_residual=float(np.max(res.rms_residuals)), **diagnostics)


# ------------------------------------------------------------------ residual


def pde_residual(gs: GroundState):
    """Residual phi'' + (N-1)/r phi' - (U - lam) phi on interior nodes.

    Derivatives are fourth-order central differences of the stored values;
    U comes from the cumulative moments of the same samples.  Returns
    (r, residual) on nodes 2 .. M-3.
    """
    phi = gs.profile
    r, v = phi.r, phi.values
    h = np.diff(r)
    if not np.allclose(h, h[0], rtol=1e-9, atol=0.0):
        raise DomainError("pde_residual needs a uniform grid")
    h = h[0]
    n = gs.n
    d1 = (-v[4:] + 8 * v[3:-1] - 8 * v[1:-3] + v[:-4]) / (12 * h)
    d2 = (-v[4:] + 16 * v[3:-1] - 30 * v[2:-2] + 16 * v[1:-3] - v[:-4]) / (12 * h * h)
    u = u_potential(phi).values[2:-2]
    ri = r[2:-2]
    return ri, d2 + (n - 1) / ri * d1 - (u - gs.lam) * v[2:-2]
