"""Norms, interaction energy, Nehari projection and the canonical eigenvalue.

The interaction energy

    D(u) = int int G(x, y) u(y)^2 u(x)^2 dx dy

is computed two ways for radial u: through the potential V (one cumulative
pass, :func:`dd_newton`) and by brute-force two-dimensional quadrature of the
sphere-averaged Green's function (:func:`dd_direct`).  The second exists only
to check the first.
"""

from __future__ import annotations

import json
from dataclasses import asdict, dataclass
from functools import lru_cache

import numpy as np
from scipy.linalg import solve_banded

from .errors import ConvergenceError, DegenerateInputError, DomainError
from .kernel import (
    BallSpec,
    RadialProfile,
    as_dimension,
    green_radial_avg,
    integrate_smooth,
    sphere_area,
    v_potential,
)


@dataclass(frozen=True)
class EnergyReport:
    h1_norm_sq: float
    dd: float
    t_u: float
    energy_at_projection: float
    source: str = "newton_route"

    def to_json(self) -> str:
        return json.dumps(asdict(self))

    @classmethod
    def from_json(cls, text: str) -> "EnergyReport":
        return cls(**json.loads(text))


def h1_norm_sq(phi: RadialProfile) -> float:
    """omega_N int (phi'^2 + phi^2) r^(N-1) dr over the sampled range."""
    n = phi.n
    r = phi.r
    d = phi.node_slopes()
    f = (d * d + phi.values ** 2) * r ** (n - 1)
    return sphere_area(n) * integrate_smooth(r, f, phi.smooth)


def l2_norm_sq(phi: RadialProfile) -> float:
    n = phi.n
    return sphere_area(n) * integrate_smooth(phi.r, phi.values ** 2 * phi.r ** (n - 1), phi.smooth)


def grad_norm_sq(phi: RadialProfile) -> float:
    n = phi.n
    d = phi.node_slopes()
    return sphere_area(n) * integrate_smooth(phi.r, d * d * phi.r ** (n - 1), phi.smooth)


def dd_newton(phi: RadialProfile, ball: BallSpec | None = None) -> float:
    """D(phi) as omega_N int V_phi phi^2 r^(N-1) dr."""
    ball = ball or phi.ball
    n = phi.n
    v = v_potential(phi, ball).values
    f = v * phi.values ** 2 * phi.r ** (n - 1)
    return sphere_area(n) * integrate_smooth(phi.r, f, phi.smooth)


@lru_cache(maxsize=8)
def _gauss(order: int):
    return np.polynomial.legendre.leggauss(order)


def dd_direct(phi: RadialProfile, ball: BallSpec | None = None, panels: int = 96,
              order: int = 10, swap: bool = False) -> float:
    """D(phi) by panel Gauss-Legendre quadrature of the averaged Green's function.

    The kernel max(r, rho)^(2-N) has a kink on the diagonal, so the diagonal
    panel squares are split into the two triangles on either side of it, each
    integrated with a collapsed tensor rule.  ``swap`` evaluates the kernel
    with its arguments exchanged.
    """
    ball = ball or phi.ball
    n = phi.n
    omega = sphere_area(n)
    top = phi.r[-1] if ball.whole_space else min(phi.r[-1], ball.radius)
    edges = np.linspace(0.0, top, panels + 1)
    xg, wg = _gauss(order)
    t = 0.5 * (xg + 1.0)
    wt = 0.5 * wg

    def kern(a, b):
        return green_radial_avg(b, a, ball) if swap else green_radial_avg(a, b, ball)

    def density(x):
        return phi(x) ** 2 * x ** (n - 1)

    lo, width = edges[:-1, None], np.diff(edges)[:, None]
    x = (lo + width * t).ravel()
    w = (width * wt).ravel()
    g = density(x) * w
    # full tensor sum, then replace the diagonal blocks
    kmat = kern(x[:, None], x[None, :])
    total = g @ kmat @ g
    blocks = g.reshape(panels, order)
    kblocks = kmat.reshape(panels, order, panels, order)
    for p in range(panels):
        total -= blocks[p] @ kblocks[p, :, p, :] @ blocks[p]

    for p in range(panels):
        a, b = edges[p], edges[p + 1]
        r = a + (b - a) * t
        wr = (b - a) * wt * density(r)
        # rho in [a, r] and rho in [r, b] for every outer node r
        lower = a + (r[:, None] - a) * t[None, :]
        wl = (r[:, None] - a) * wt[None, :] * density(lower)
        upper = r[:, None] + (b - r[:, None]) * t[None, :]
        wu = (b - r[:, None]) * wt[None, :] * density(upper)
        inner = (np.sum(kern(r[:, None], lower) * wl, axis=1)
                 + np.sum(kern(r[:, None], upper) * wu, axis=1))
        total += wr @ inner
    return float(omega * omega * total)


def nehari_scale(phi: RadialProfile, ball: BallSpec | None = None,
                 source: str = "newton_route") -> EnergyReport:
    """Scaling t_u that puts t_u * phi on the Nehari manifold, and sup_t I(t phi)."""
    ball = ball or phi.ball
    norm = h1_norm_sq(phi)
    if source == "newton_route":
        dd = dd_newton(phi, ball)
    elif source == "direct_route":
        dd = dd_direct(phi, ball)
    else:
        raise DomainError(f"unknown source {source!r}")
    if norm <= 0 or dd <= 0:
        raise DegenerateInputError("Nehari scaling needs a nonzero profile")
    return EnergyReport(h1_norm_sq=norm, dd=dd, t_u=float(np.sqrt(norm / dd)),
                        energy_at_projection=norm * norm / (4.0 * dd), source=source)


def energy(phi: RadialProfile, ball: BallSpec | None = None) -> float:
    """I(phi) = 1/2 ||phi||^2 - 1/4 D(phi)."""
    ball = ball or phi.ball
    return 0.5 * h1_norm_sq(phi) - 0.25 * dd_newton(phi, ball)


def radial_operator(potential, radius: float, dim, nodes: int = 2001):
    """Finite-volume discretisation of -Laplace + U on radial functions.

    Returns (diag, offdiag, weights, r) for the symmetric pencil A u = mu W u
    with Dirichlet data at ``radius`` and the natural condition u'(0) = 0.
    ``potential`` is a callable or a RadialProfile.
    """
    n = as_dimension(dim).n
    if nodes < 3:
        raise DomainError("need at least three nodes")
    h = radius / (nodes - 1)
    r = np.arange(nodes - 1) * h  # last node is the Dirichlet boundary
    faces = r + 0.5 * h
    flux = faces ** (n - 1) / h
    inner = np.maximum(r - 0.5 * h, 0.0)
    weights = (faces ** n - inner ** n) / n
    u = np.asarray(potential(r), dtype=np.float64) if callable(potential) else potential
    diag = flux + np.concatenate(([0.0], flux[:-1])) + u * weights
    off = -flux[:-1]
    return diag, off, weights, r


def smallest_eigenvalue(potential, radius: float, dim, nodes: int = 2001,
                        tol: float = 1e-13, max_iter: int = 500) -> float:
    """Lowest Dirichlet eigenvalue of -Laplace + U(|x|) on radial functions of B_radius.

    Inverse power iteration on the symmetrised finite-volume matrix.
    """
    diag, off, weights, _ = radial_operator(potential, radius, dim, nodes)
    s = 1.0 / np.sqrt(weights)
    d = diag * s * s
    e = off * s[:-1] * s[1:]
    ab = np.zeros((3, d.size))
    ab[0, 1:] = e
    ab[1] = d
    ab[2, :-1] = e
    v = np.ones(d.size) / np.sqrt(d.size)
    mu = np.inf
    history = []
    for _ in range(max_iter):
        w = solve_banded((1, 1), ab, v)
        v_new = w / np.linalg.norm(w)
        bv = d * v_new
        bv[:-1] += e * v_new[1:]
        bv[1:] += e * v_new[:-1]
        mu_new = float(v_new @ bv)
        history.append(mu_new)
        if abs(mu_new - mu) <= tol * abs(mu_new):
            return mu_new
        v, mu = v_new, mu_new
    raise ConvergenceError("inverse iteration did not converge",
                           {"rayleigh_quotients": history[-10:]})


def quadratic_form(potential, radius: float, dim, trial, nodes: int = 2001):
    """(int |grad v|^2 + U v^2, int v^2) for a radial trial function on the same grid."""
    diag, off, weights, r = radial_operator(potential, radius, dim, nodes)
    v = np.asarray(trial(r), dtype=np.float64)
    av = diag * v
    av[:-1] += off * v[1:]
    av[1:] += off * v[:-1]
    omega = sphere_area(dim)
    return omega * float(v @ av), omega * float(weights @ (v * v))
