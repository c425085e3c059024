"""Invariant suites shared by the CLI ``verify`` command and the test-suite.

Each suite returns a list of :class:`Check` results; nothing here raises on a
failed check.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from typing import Callable, Dict, List

import numpy as np
from scipy.integrate import quad

from .energy import dd_direct, dd_newton, smallest_eigenvalue
from .errors import ChoquardError
from .grid3d import GridFunction3D
from .kernel import BallSpec, Dimension, RadialProfile, green_pointwise, green_radial_avg, u_potential
from .rearrange import talenti_check
from .shooting import canonical_solution, default_scan, shifted_scan, solve_ball


@dataclass
class Check:
    name: str
    passed: bool
    value: float = float("nan")
    limit: float = float("nan")
    details: dict = field(default_factory=dict)

    def line(self) -> str:
        status = "PASS" if self.passed else "FAIL"
        return f"{status} {self.name}: value={self.value:.6g} limit={self.limit:.6g}"


# ------------------------------------------------------------------- corpora


def random_profile(rng: np.random.Generator, dim: int, nodes: int = 2001) -> RadialProfile:
    """Smooth positive profile (1 - (r/R)^2) exp(-a r^2) (1 + b cos(k r)) with exact slopes."""
    big_r = rng.uniform(1.0, 6.0)
    a = rng.uniform(0.05, 1.0)
    b = rng.uniform(0.0, 0.5)
    k = rng.uniform(0.0, 3.0)
    ball = BallSpec(Dimension(dim), big_r)
    r = np.linspace(0.0, big_r, nodes)
    p = 1.0 - (r / big_r) ** 2
    g = np.exp(-a * r * r)
    c = 1.0 + b * np.cos(k * r)
    val = p * g * c
    dval = (-2.0 * r / big_r ** 2) * g * c + p * (-2.0 * a * r) * g * c + p * g * (-b * k * np.sin(k * r))
    return RadialProfile.from_arrays(r, val, ball, dval)


def random_source(rng: np.random.Generator, ball: BallSpec, n_grid: int = 41) -> GridFunction3D:
    """Nonnegative sum of one to three Gaussian bumps at random centres inside the ball."""
    big_r = ball.radius
    count = int(rng.integers(1, 4))
    centres = rng.uniform(-0.5 * big_r, 0.5 * big_r, (count, 3))
    widths = rng.uniform(0.1, 0.4, count) * big_r
    heights = rng.uniform(0.5, 2.0, count)

    def f(x, y, z):
        out = np.zeros_like(x)
        for c, w, a in zip(centres, widths, heights):
            out += a * np.exp(-((x - c[0]) ** 2 + (y - c[1]) ** 2 + (z - c[2]) ** 2) / w ** 2)
        return out

    return GridFunction3D.from_function(f, ball, n_grid)


def angular_average_3d(r: float, rho: float, ball: BallSpec) -> float:
    """Mean of green_pointwise(r z, (0, 0, rho)) over z on the unit sphere, by 1D quadrature."""
    y = np.array([0.0, 0.0, rho])

    def integrand(t):
        s = math.sqrt(max(0.0, 1.0 - t * t))
        return green_pointwise(np.array([r * s, 0.0, r * t]), y, ball)

    # the kernel peaks at t = 1 when r ~ rho
    val, _ = quad(integrand, -1.0, 1.0, points=[1.0 - 1e-6], epsabs=1e-13, epsrel=1e-12, limit=400)
    return 0.5 * val


# -------------------------------------------------------------------- suites


def kernel_suite(seed: int = 0, profiles: int = 20, pairs: int = 100) -> List[Check]:
    rng = np.random.default_rng(seed)
    worst, where = 0.0, None
    for n in (3, 4, 5, 6):
        for _ in range(profiles):
            phi = random_profile(rng, n)
            a, b = dd_newton(phi), dd_direct(phi)
            err = abs(a - b) / b
            if err > worst:
                worst, where = err, {"n": n, "R": phi.ball.radius}
    checks = [Check("dd_newton_vs_dd_direct", worst < 1e-5, worst, 1e-5, {"worst": where})]
    ball = BallSpec(Dimension(3), 2.0)
    err = 0.0
    for _ in range(pairs):
        r, rho = rng.uniform(0.05, 2.0, 2)
        # keep the two spheres apart from each other and from the boundary by a hair
        if abs(r - rho) < 1e-6:
            rho = min(2.0, rho + 1e-3)
        err = max(err, abs(float(green_radial_avg(r, rho, ball)) - angular_average_3d(r, rho, ball)))
    checks.append(Check("green_radial_avg_vs_angular", err < 1e-8, err, 1e-8))
    return checks


def talenti_suite(seed: int = 0, sources: int = 20, n_grid: int = 41, radius: float = 5.0) -> List[Check]:
    rng = np.random.default_rng(seed)
    ball = BallSpec(Dimension(3), radius)
    out = []
    for i in range(sources):
        rep = talenti_check(random_source(rng, ball, n_grid))
        out.append(Check(f"talenti_source_{i:02d}", rep.passed, rep.margin, rep.tolerance,
                         rep.details))
    return out


def uniqueness_suite(dims=(3, 4, 5, 6), radii=(2.0, 5.0)) -> List[Check]:
    out = []
    for n in dims:
        for big_r in radii:
            name = f"uniqueness_n{n}_R{big_r:g}"
            try:
                ball = BallSpec(Dimension(n), big_r)
                g1 = solve_ball(ball, scan=default_scan())
                g2 = solve_ball(ball, scan=shifted_scan())
            except ChoquardError as exc:
                out.append(Check(name, False, details={"error": str(exc)}))
                continue
            da = abs(g1.amplitude - g2.amplitude) / g1.amplitude
            de = abs(g1.energy - g2.energy) / g1.energy
            out.append(Check(name, da < 1e-7 and de < 1e-9, da, 1e-7,
                             {"amplitude_rel": da, "energy_rel": de}))
    return out


def spectral_suite(radii=(2.0, 5.0, 10.0), nodes: int = 4001) -> List[Check]:
    out = []
    for big_r in radii:
        gs = solve_ball(BallSpec(Dimension(3), big_r))
        sol = canonical_solution(gs)
        mu = smallest_eigenvalue(u_potential(sol.profile), sol.r0, 3, nodes=nodes)
        out.append(Check(f"spectral_R{big_r:g}", abs(mu - 1.0) < 1e-3, abs(mu - 1.0), 1e-3,
                         {"eigenvalue": mu, "r0": sol.r0}))
    return out


SUITES: Dict[str, Callable[[], List[Check]]] = {
    "kernel": kernel_suite,
    "talenti": talenti_suite,
    "uniqueness": uniqueness_suite,
    "spectral": spectral_suite,
}


def run_suites(names) -> List[Check]:
    out = []
    for name in names:
        checks = SUITES[name]()
        for c in checks:
            c.details.setdefault("suite", name)
        out.extend(checks)
    return out
