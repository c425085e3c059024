"""Symmetric decreasing rearrangement, Talenti's comparison and the energy inequalities.

Radial inputs are rearranged by sorting (value, shell volume) pairs and
re-accumulating volume from the origin.  Grid inputs are rearranged two ways:
into a radial profile on an equi-volume grid (one node per cell, in sorted
order), and into a grid function by handing the sorted values to the nodes
in order of increasing |x|, an exact permutation of the values.  Ties are
broken by original index throughout.
"""

from __future__ import annotations

import json
import math
from dataclasses import asdict, dataclass, field
from typing import Union

import numpy as np

from .energy import dd_newton, grad_norm_sq, l2_norm_sq
from .errors import DomainError
from .grid3d import (
    GridFunction3D,
    discrete_dd,
    discrete_grad_sq,
    discrete_l2_sq,
    poisson_solve,
)
from .kernel import BallSpec, RadialGrid, RadialProfile, sphere_area

__all__ = [
    "CheckReport",
    "GridFunction3D",
    "rearrange_radial",
    "rearrange_grid3d",
    "symmetrize_grid3d",
    "radial_poisson",
    "talenti_check",
    "rearrangement_energy_check",
]


@dataclass
class CheckReport:
    check: str
    passed: bool
    margin: float
    tolerance: float
    details: dict = field(default_factory=dict)

    def to_dict(self) -> dict:
        out = asdict(self)
        out["pass"] = out.pop("passed")
        return out

    def to_json(self) -> str:
        return json.dumps(self.to_dict(), sort_keys=True)

    @classmethod
    def from_json(cls, text: str) -> "CheckReport":
        data = json.loads(text)
        data["passed"] = data.pop("pass")
        return cls(**data)


def _require_nonneg(values):
    if np.any(np.asarray(values) < 0):
        raise DomainError("rearrangement needs a nonnegative function; pass |u|")


def _cell_volumes(r: np.ndarray, n: int, top: float) -> np.ndarray:
    """Volumes of the dual shells [r_(i-1/2), r_(i+1/2)] clipped to [0, top]."""
    edges = np.concatenate(([0.0], 0.5 * (r[1:] + r[:-1]), [top]))
    edges = np.clip(edges, 0.0, top)
    return sphere_area(n) / n * (edges[1:] ** n - edges[:-1] ** n)


def rearrange_radial(phi: RadialProfile) -> RadialProfile:
    """Equimeasurable radially decreasing rearrangement of a nonnegative profile.

    Each node carries the volume of its dual shell.  Values are sorted
    decreasingly and the volumes accumulated; the rearranged step function
    takes value v_k on the shell between the accumulated radii, and is sampled
    back on the input grid (node j takes the value whose volume interval
    contains the volume of the ball out to the outer edge midpoint of node j).
    """
    _require_nonneg(phi.values)
    n, r, v = phi.n, phi.r, phi.values
    top = r[-1]
    vol = _cell_volumes(r, n, top)
    order = np.argsort(-v, kind="stable")
    cum = np.cumsum(vol[order])
    # volume enclosed by each node's dual cell centre
    centre = np.concatenate(([0.0], np.cumsum(vol)[:-1])) + 0.5 * vol
    k = np.minimum(np.searchsorted(cum, centre, side="left"), r.size - 1)
    return RadialProfile(phi.grid, v[order][k], phi.ball)


def rearrange_grid3d(u: GridFunction3D) -> RadialProfile:
    """Radial profile of the rearranged grid function on an equi-volume grid.

    Cell k in sorted order occupies the volume between k h^3 and (k+1) h^3;
    its node sits at the radius enclosing (k + 1/2) h^3.  The origin takes the
    maximum, and the ball radius takes zero if the cells do not fill it.
    """
    vals = u.interior()
    _require_nonneg(vals)
    order = np.argsort(-vals, kind="stable")
    ranked = vals[order]
    cell = u.h ** 3
    radii = (3.0 * (np.arange(ranked.size) + 0.5) * cell / (4.0 * math.pi)) ** (1.0 / 3.0)
    r = np.concatenate(([0.0], radii))
    out = np.concatenate(([ranked[0]], ranked))
    if r[-1] < u.radius:
        r = np.append(r, u.radius)
        out = np.append(out, 0.0)
    return RadialProfile(RadialGrid(r), out, u.ball)


def symmetrize_grid3d(u: GridFunction3D) -> GridFunction3D:
    """Discrete Schwarz symmetrisation: sorted values placed on nodes sorted by |x|."""
    vals = u.interior()
    _require_nonneg(vals)
    radii = u.radii()[u.mask]
    slots = np.lexsort((np.arange(radii.size), radii))
    out = np.empty_like(vals)
    out[slots] = -np.sort(-vals, kind="stable")
    return u.with_interior(out)


def radial_poisson(f: RadialProfile, radius: float) -> RadialProfile:
    """v(r) = int_r^R M(s) / (omega s^(N-1)) ds with M(s) = omega int_0^s f t^(N-1) dt.

    Solution of -Lap v = f on B_R with v(R) = 0, by two cumulative
    quadratures on f's grid (extended to R if needed).
    """
    n = f.n
    omega = sphere_area(n)
    r, vals = f.r, f.values
    if r[-1] < radius:
        r = np.append(r, radius)
        vals = np.append(vals, 0.0)
    elif r[-1] > radius:
        raise DomainError("profile extends beyond the ball")
    # exact for piecewise-linear f: int t^(N-1) (a + b t) dt on each interval
    h = np.diff(r)
    slope = np.diff(vals) / h
    base = vals[:-1] - slope * r[:-1]
    pieces = (base * (r[1:] ** n - r[:-1] ** n) / n
              + slope * (r[1:] ** (n + 1) - r[:-1] ** (n + 1)) / (n + 1))
    mass = omega * np.concatenate(([0.0], np.cumsum(pieces)))
    flux = np.zeros_like(r)
    flux[1:] = mass[1:] / (omega * r[1:] ** (n - 1))
    # flux ~ f(0) r / N near the origin; trapezoid from the outer boundary
    seg = 0.5 * h * (flux[1:] + flux[:-1])
    v = np.concatenate((np.cumsum(seg[::-1])[::-1], [0.0]))
    return RadialProfile(RadialGrid(r), v, f.ball)


def talenti_check(f: GridFunction3D, ball: BallSpec = None) -> CheckReport:
    """Check u* <= v + tol with -Lap u = f on the grid and -Lap v = f* radially.

    tol = 4 h max|f| R covers the first-order error of the staircase mask.
    The reported margin is max(u* - v) over the radial nodes of u*.
    """
    ball = ball or f.ball
    _require_nonneg(f.values)
    u = poisson_solve(f)
    u_star = rearrange_grid3d(u)
    f_star = rearrange_grid3d(f)
    v = radial_poisson(f_star, ball.radius)
    # drop the zero node padded at R, where u* = v = 0 trivially
    keep = u_star.r < ball.radius
    r_nodes, u_nodes = u_star.r[keep], u_star.values[keep]
    v_at = np.interp(r_nodes, v.r, v.values)
    excess = u_nodes - v_at
    tol = 4.0 * f.h * float(np.max(np.abs(f.values))) * ball.radius
    worst = int(np.argmax(excess))
    margin = float(excess[worst])
    return CheckReport(
        check="talenti",
        passed=bool(margin <= tol),
        margin=margin,
        tolerance=tol,
        details={
            "argmax_radius": float(r_nodes[worst]),
            "min_gap": float(np.min(v_at - u_nodes)),
            "max_gap": float(np.max(v_at - u_nodes)),
            "u_max": float(u_star.values[0]),
            "v_max": float(v.values[0]),
            "n_grid": f.n,
        },
    )


def rearrangement_energy_check(phi: Union[RadialProfile, GridFunction3D],
                               ball: BallSpec = None) -> CheckReport:
    """Gradient decrease, L2 preservation and interaction increase under rearrangement.

    Radial inputs use the profile quadratures and dd_newton; grid inputs use
    the discrete symmetrisation with the grid's own gradient and interaction.
    Each relation gets slack tol_rel times the size of its own quantity, with
    tol_rel = 4 h / R; the L2 check uses 1e-12 for grids (exact permutation).
    The margin is the smallest signed slack across the three relations.
    """
    if isinstance(phi, GridFunction3D):
        ball = ball or phi.ball
        star = symmetrize_grid3d(phi)
        grad = (discrete_grad_sq(phi), discrete_grad_sq(star))
        l2 = (discrete_l2_sq(phi), discrete_l2_sq(star))
        dd = (discrete_dd(phi), discrete_dd(star))
        rel = 4.0 * phi.h / ball.radius
        l2_rel = 1e-12
        kind = "grid"
    else:
        ball = ball or phi.ball
        star = rearrange_radial(phi)
        plain = phi.with_values(phi.values) if phi.smooth else phi
        grad = (grad_norm_sq(plain), grad_norm_sq(star))
        l2 = (l2_norm_sq(plain), l2_norm_sq(star))
        dd = (dd_newton(plain, ball), dd_newton(star, ball))
        rel = 4.0 * phi.grid.max_spacing / phi.r[-1]
        l2_rel = rel
        kind = "radial"
    slack_grad = grad[0] + rel * grad[0] - grad[1]
    slack_l2 = l2_rel * l2[0] - abs(l2[1] - l2[0])
    slack_dd = dd[1] - (dd[0] - rel * dd[0])
    margin = min(slack_grad, slack_l2, slack_dd)
    return CheckReport(
        check="rearrangement_energy",
        passed=bool(margin >= 0),
        margin=float(margin),
        tolerance=float(rel),
        details={
            "input": kind,
            "grad_sq": list(map(float, grad)),
            "l2_sq": list(map(float, l2)),
            "dd": list(map(float, dd)),
            "grad_ok": bool(slack_grad >= 0),
            "l2_ok": bool(slack_l2 >= 0),
            "dd_ok": bool(slack_dd >= 0),
        },
    )
