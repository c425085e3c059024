"""Ball ground states against the whole-space one as the radius grows.

For each radius the sweep records the ball level c_R, the multiplier, the H^1
distance between the zero-extended ball profile and the whole-space profile,
and the upper bound obtained by cutting the whole-space profile off with a
ramp eta_R and projecting onto the ball's Nehari manifold.
"""

from __future__ import annotations

import csv
import io
import json
import logging
import math
import os
from concurrent.futures import ThreadPoolExecutor
from dataclasses import asdict, dataclass
from typing import Optional, Sequence

import numpy as np

from .energy import nehari_scale
from .errors import ChoquardError, DomainError
from .kernel import BallSpec, Dimension, RadialGrid, RadialProfile, as_dimension, integrate, sphere_area
from .shooting import DEFAULT_TOL, GroundState, Tolerances, solve_ball, whole_space_ground_state

log = logging.getLogger(__name__)

CSV_FIELDS = ("R", "c_R", "lambda_R", "amplitude", "profile_distance", "upper_bound", "gap")
DEFAULT_RADII = (2.0, 4.0, 8.0, 16.0, 32.0)


def default_radii(n: int) -> tuple:
    """Sweep radii; the top radius is halved for N >= 5, where canonical balls are larger."""
    return DEFAULT_RADII if n < 5 else DEFAULT_RADII[:-1]


def ramp(r, radius: float, delta: Optional[float] = None):
    """C^1 cut-off: 1 on [0, R/2], linear in the middle, quadratic corners of width delta.

    The linear slope is 1 / (R/2 - delta), so with delta = R/250 the largest
    |eta'| is 2.016 / R.  Returns (eta, eta').
    """
    big_r = float(radius)
    delta = big_r / 250.0 if delta is None else float(delta)
    if not 0 < delta <= big_r / 4:
        raise DomainError("corner width must lie in (0, R/4]")
    r = np.asarray(r, dtype=np.float64)
    a, b = 0.5 * big_r, big_r
    s = 1.0 / (b - a - delta)
    eta = np.ones_like(r)
    deta = np.zeros_like(r)
    left = (r > a) & (r <= a + delta)
    mid = (r > a + delta) & (r < b - delta)
    right = (r >= b - delta) & (r < b)
    out = r >= b
    x = r[left] - a
    eta[left] = 1.0 - 0.5 * s * x * x / delta
    deta[left] = -s * x / delta
    eta[mid] = 1.0 - 0.5 * s * delta - s * (r[mid] - a - delta)
    deta[mid] = -s
    y = b - r[right]
    eta[right] = 0.5 * s * y * y / delta
    deta[right] = -s * y / delta
    eta[out] = 0.0
    deta[out] = 0.0
    return eta, deta


def cutoff_profile(ball: BallSpec, spacing: float = 1e-3, delta: Optional[float] = None) -> RadialProfile:
    """eta_R sampled on a grid that contains its breakpoints, with exact slopes."""
    big_r = ball.radius
    if ball.whole_space:
        raise DomainError("the cut-off needs a finite radius")
    delta = big_r / 250.0 if delta is None else delta
    count = max(2001, int(math.ceil(big_r / spacing)) + 1)
    r = np.union1d(np.linspace(0.0, big_r, count),
                   [0.5 * big_r, 0.5 * big_r + delta, big_r - delta])
    eta, deta = ramp(r, big_r, delta)
    return RadialProfile(RadialGrid(r), eta, ball, deta)


def upper_bound_energy(radius: float, phi_inf: GroundState, ball: Optional[BallSpec] = None,
                       spacing: float = 1e-3):
    """(s_R, I_R(s_R Psi_R)) with Psi_R = eta_R phi_inf restricted to the ball."""
    ball = ball or BallSpec(phi_inf.ball.dim, radius)
    eta = cutoff_profile(ball, spacing)
    phi, dphi = phi_inf.evaluate(eta.r)
    psi = RadialProfile(eta.grid, eta.values * phi, ball,
                        eta.derivative * phi + eta.values * dphi)
    report = nehari_scale(psi, ball)
    return report.t_u, report.energy_at_projection


def _h1_difference(a: GroundState, b: GroundState) -> float:
    """H^1 norm of a - b, each extended past its own range (zero on balls, tail for R^N)."""
    top = max(a.profile.r[-1], b.profile.r[-1])
    r = np.union1d(a.profile.r, b.profile.r)
    r = r[r <= top]
    va, da = a.evaluate(r)
    vb, db = b.evaluate(r)
    n = a.n
    dv, dd = va - vb, da - db
    f = (dv * dv + dd * dd) * r ** (n - 1)
    return math.sqrt(sphere_area(n) * integrate(r, f))


def profile_distance(gs: GroundState, phi_inf: GroundState) -> float:
    """||phi_R - phi_inf||_{H^1(R^N)} with phi_R extended by zero."""
    return _h1_difference(gs, phi_inf)


@dataclass
class SweepRecord:
    R: float
    c_R: float = float("nan")
    lambda_R: float = float("nan")
    amplitude: float = float("nan")
    profile_distance: float = float("nan")
    upper_bound: float = float("nan")
    gap: float = float("nan")
    s_R: float = float("nan")
    method: str = ""
    error: Optional[str] = None

    @property
    def ok(self) -> bool:
        return self.error is None


def _row(radius: float, dim: Dimension, phi_inf: GroundState, tol: Tolerances) -> SweepRecord:
    try:
        ball = BallSpec(dim, radius)
        gs = solve_ball(ball, tol)
        s_r, bound = upper_bound_energy(radius, phi_inf, ball)
        return SweepRecord(
            R=radius, c_R=gs.energy, lambda_R=gs.lam, amplitude=gs.amplitude,
            profile_distance=profile_distance(gs, phi_inf), upper_bound=bound,
            gap=gs.energy - phi_inf.energy, s_R=s_r, method=gs.diagnostics.get("method", ""))
    except ChoquardError as exc:
        log.warning("sweep row R=%g failed: %s", radius, exc)
        return SweepRecord(R=radius, error=f"{type(exc).__name__}: {exc}")


def solver_threads() -> int:
    try:
        return max(1, int(os.environ.get("SOLVER_THREADS", "")))
    except ValueError:
        return os.cpu_count() or 1


def validate_radii(radii: Sequence[float]) -> list:
    radii = [float(r) for r in radii]
    if not radii:
        raise DomainError("radii list is empty")
    if any(not (r > 0 and math.isfinite(r)) for r in radii):
        raise DomainError("radii must be positive and finite")
    if len(set(radii)) != len(radii):
        raise DomainError("radii must be distinct")
    return sorted(radii)


def run_sweep(dim, radii: Optional[Sequence[float]] = None, tol: Tolerances = DEFAULT_TOL,
              threads: Optional[int] = None) -> list:
    """One SweepRecord per radius, in increasing R; failed rows carry ``error``.

    Rows run concurrently on ``threads`` workers (default SOLVER_THREADS or
    the core count); results do not depend on the thread count.
    """
    dim = as_dimension(dim)
    radii = validate_radii(default_radii(dim.n) if radii is None else radii)
    phi_inf = whole_space_ground_state(dim.n, tol)
    workers = threads or solver_threads()
    if workers == 1:
        return [_row(r, dim, phi_inf, tol) for r in radii]
    with ThreadPoolExecutor(max_workers=workers) as pool:
        return list(pool.map(lambda r: _row(r, dim, phi_inf, tol), radii))


def records_to_csv(records, path=None) -> str:
    buf = io.StringIO()
    writer = csv.writer(buf, lineterminator="\n")
    writer.writerow(CSV_FIELDS)
    for rec in records:
        if rec.ok:
            writer.writerow([f"{getattr(rec, k):.17g}" for k in CSV_FIELDS])
        else:
            writer.writerow([f"{rec.R:.17g}"] + ["ERROR"] * (len(CSV_FIELDS) - 1))
    text = buf.getvalue()
    if path is not None:
        with open(path, "w", newline="") as fh:
            fh.write(text)
    return text


def records_from_csv(text: str) -> list:
    rows = list(csv.DictReader(io.StringIO(text)))
    out = []
    for row in rows:
        if row["c_R"] == "ERROR":
            out.append(SweepRecord(R=float(row["R"]), error="ERROR"))
        else:
            out.append(SweepRecord(**{k: float(row[k]) for k in CSV_FIELDS}))
    return out


def records_to_json(records) -> str:
    return json.dumps([asdict(r) for r in records], indent=2)
