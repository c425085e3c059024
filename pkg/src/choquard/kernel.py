"""Kernels and radial potentials of the ball.

All radial functions live in :class:`RadialProfile`.  The interaction of a
radial density with the kernel ``|x - y|^(2-N)`` collapses, by Newton's
theorem, onto two cumulative moments

    q(r) = omega_N int_0^r s phi(s)^2 ds
    m(r) = omega_N int_0^r s^(N-1) phi(s)^2 ds

from which the potentials U, V and the multiplier lambda follow in closed
form.  The moments integrate s^k times the square of the profile's own
interpolant (cubic Hermite when slopes are known, linear otherwise) with a
six-point Gauss rule per interval, so the integral is exact for the
interpolant.  Plain integrals use the trapezoid rule, upgraded to the exact
Hermite integral when the integrand's derivative is supplied.
"""

from __future__ import annotations

import csv
import io
import math
from dataclasses import dataclass, field
from typing import Optional

import numpy as np
from scipy.interpolate import CubicHermiteSpline

from .errors import DomainError, SingularityError


@dataclass(frozen=True)
class Dimension:
    n: int

    def __post_init__(self):
        if int(self.n) != self.n or self.n < 3:
            raise DomainError(f"dimension must be >= 3, got {self.n}")
        object.__setattr__(self, "n", int(self.n))


def as_dimension(dim) -> Dimension:
    return dim if isinstance(dim, Dimension) else Dimension(dim)


@dataclass(frozen=True)
class BallSpec:
    """Ball of ``radius`` centred at the origin; ``radius = inf`` marks whole space."""

    dim: Dimension
    radius: float

    def __post_init__(self):
        object.__setattr__(self, "dim", as_dimension(self.dim))
        if not self.radius > 0:
            raise DomainError(f"radius must be positive, got {self.radius}")
        object.__setattr__(self, "radius", float(self.radius))

    @property
    def n(self) -> int:
        return self.dim.n

    @property
    def whole_space(self) -> bool:
        return math.isinf(self.radius)

    @property
    def image_factor(self) -> float:
        """R^(2-N), zero for whole space."""
        return 0.0 if self.whole_space else self.radius ** (2 - self.n)


@dataclass(frozen=True, eq=False)
class RadialGrid:
    nodes: np.ndarray

    def __post_init__(self):
        nodes = np.asarray(self.nodes, dtype=np.float64)
        if nodes.ndim != 1 or nodes.size < 2:
            raise DomainError("a radial grid needs at least two nodes")
        if nodes[0] < 0:
            raise DomainError("radial nodes must be nonnegative")
        if np.any(np.diff(nodes) <= 0):
            raise DomainError("radial nodes must be strictly increasing")
        nodes.setflags(write=False)
        object.__setattr__(self, "nodes", nodes)

    def __len__(self):
        return self.nodes.size

    @property
    def max_spacing(self) -> float:
        return float(np.max(np.diff(self.nodes)))


@dataclass(frozen=True, eq=False)
class RadialProfile:
    """A radial function sampled on a grid, optionally with its derivative.

    Between nodes the profile is the cubic Hermite interpolant when
    ``derivative`` is given and the piecewise-linear interpolant otherwise.
    Outside the sampled range it is held at zero (``extend="zero"``) or at the
    end values (``extend="hold"``).
    """

    grid: RadialGrid
    values: np.ndarray
    ball: BallSpec
    derivative: Optional[np.ndarray] = None
    _spline: object = field(default=None, repr=False, compare=False)

    def __post_init__(self):
        if not isinstance(self.grid, RadialGrid):
            object.__setattr__(self, "grid", RadialGrid(self.grid))
        values = np.array(self.values, dtype=np.float64)
        if values.shape != self.grid.nodes.shape:
            raise DomainError("values and nodes differ in length")
        if not np.all(np.isfinite(values)):
            raise DomainError("profile values must be finite")
        values.setflags(write=False)
        object.__setattr__(self, "values", values)
        if self.derivative is not None:
            d = np.array(self.derivative, dtype=np.float64)
            if d.shape != values.shape or not np.all(np.isfinite(d)):
                raise DomainError("derivative must be finite and match values")
            d.setflags(write=False)
            object.__setattr__(self, "derivative", d)
            object.__setattr__(self, "_spline", CubicHermiteSpline(self.grid.nodes, values, d))

    @classmethod
    def from_arrays(cls, r, values, ball, derivative=None) -> "RadialProfile":
        return cls(RadialGrid(r), values, ball, derivative)

    @classmethod
    def from_function(cls, func, ball, r, dfunc=None) -> "RadialProfile":
        r = np.asarray(r, dtype=np.float64)
        return cls(RadialGrid(r), func(r), ball, None if dfunc is None else dfunc(r))

    @property
    def r(self) -> np.ndarray:
        return self.grid.nodes

    @property
    def n(self) -> int:
        return self.ball.n

    @property
    def smooth(self) -> bool:
        return self.derivative is not None

    def __len__(self):
        return self.values.size

    def _inside(self, r):
        r = np.asarray(r, dtype=np.float64)
        return r, (r >= self.r[0]) & (r <= self.r[-1])

    def __call__(self, r, extend: str = "zero"):
        r, inside = self._inside(r)
        if self._spline is not None:
            out = self._spline(np.clip(r, self.r[0], self.r[-1]))
        else:
            out = np.interp(r, self.r, self.values)
        if extend == "zero":
            out = np.where(inside | (r < self.r[0]), out, 0.0)
        return out

    def slope(self, r, extend: str = "zero"):
        """First derivative of the interpolant."""
        r, inside = self._inside(r)
        if self._spline is not None:
            out = self._spline(np.clip(r, self.r[0], self.r[-1]), 1)
        else:
            d = np.gradient(self.values, self.r, edge_order=2)
            out = np.interp(r, self.r, d)
        return np.where(inside, out, 0.0) if extend == "zero" else out

    def node_slopes(self) -> np.ndarray:
        """Derivative at the nodes: stored data, else second-order differences."""
        if self.derivative is not None:
            return self.derivative
        return np.gradient(self.values, self.r, edge_order=2)

    def with_values(self, values, derivative=None) -> "RadialProfile":
        return RadialProfile(self.grid, values, self.ball, derivative)

    def to_csv(self, path=None) -> str:
        buf = io.StringIO()
        buf.write("r,value\n")
        for r, v in zip(self.r, self.values):
            buf.write(f"{r:.17g},{v:.17g}\n")
        text = buf.getvalue()
        if path is not None:
            with open(path, "w", newline="\n") as fh:
                fh.write(text)
        return text

    @classmethod
    def from_csv(cls, source, ball: BallSpec) -> "RadialProfile":
        if isinstance(source, str) and "\n" not in source:
            with open(source, newline="") as fh:
                text = fh.read()
        else:
            text = source
        rows = list(csv.reader(io.StringIO(text)))
        if not rows or [c.strip() for c in rows[0]] != ["r", "value"]:
            raise DomainError("profile CSV must start with header 'r,value'")
        data = np.array([[float(a), float(b)] for a, b in rows[1:]], dtype=np.float64)
        return cls(RadialGrid(data[:, 0]), data[:, 1], ball)


# --------------------------------------------------------------------- quadrature


def cumulative_integral(r, f, df=None) -> np.ndarray:
    """Running integral of f on nodes r, starting at 0.

    With ``df`` the per-interval rule integrates the cubic Hermite interpolant
    exactly: h/2 (f_i + f_j) + h^2/12 (f'_i - f'_j).
    """
    h = np.diff(r)
    pieces = 0.5 * h * (f[1:] + f[:-1])
    if df is not None:
        pieces = pieces + h * h / 12.0 * (df[:-1] - df[1:])
    return np.concatenate(([0.0], np.cumsum(pieces)))


def integrate(r, f, df=None) -> float:
    return float(cumulative_integral(r, f, df)[-1])


def integrate_smooth(r, f, smooth: bool = True) -> float:
    """Integral of sampled f; end-corrected with difference slopes when smooth."""
    df = np.gradient(f, r, edge_order=2) if smooth else None
    return integrate(r, f, df)


def weighted_power(r, p: int) -> np.ndarray:
    """r**p with 0**p := 0 for p <= 0 (used only where multiplied by O(r^N) terms)."""
    r = np.asarray(r, dtype=np.float64)
    if p >= 0:
        return r ** p
    out = np.zeros_like(r)
    np.power(r, p, out=out, where=r > 0)
    return out


# ----------------------------------------------------------------- kernel values


def sphere_area(dim) -> float:
    """Surface area of the unit sphere S^(N-1)."""
    n = as_dimension(dim).n
    return math.exp(math.log(2.0) + 0.5 * n * math.log(math.pi) - math.lgamma(0.5 * n))


def newton_kernel(r, rho, dim):
    """Spherical average of |r z - x|^(2-N) over z in S^(N-1) with |x| = rho.

    Equals min(r^(2-N), rho^(2-N)), i.e. the power of the *larger* radius.
    """
    n = as_dimension(dim).n
    r = np.asarray(r, dtype=np.float64)
    rho = np.asarray(rho, dtype=np.float64)
    if np.any(r < 0) or np.any(rho < 0):
        raise DomainError("radii must be nonnegative")
    big = np.maximum(r, rho)
    if np.any(big == 0):
        raise SingularityError("newton_kernel is singular at r = rho = 0")
    out = big ** (2 - n)
    return float(out) if out.ndim == 0 else out


def green_pointwise(x, y, ball: BallSpec) -> float:
    """Green's function of the ball with the unnormalised |x-y|^(2-N) kernel."""
    x = np.asarray(x, dtype=np.float64)
    y = np.asarray(y, dtype=np.float64)
    n, big_r = ball.n, ball.radius
    if x.shape != (n,) or y.shape != (n,):
        raise DomainError(f"points must have {n} coordinates")
    nx, ny = np.linalg.norm(x), np.linalg.norm(y)
    # points normalised onto the sphere may overshoot R by round-off
    if nx > big_r * (1 + 1e-14) or ny > big_r * (1 + 1e-14):
        raise DomainError("point outside the closed ball")
    d = np.linalg.norm(y - x)
    if d == 0:
        raise SingularityError("green_pointwise is singular at x = y")
    if nx == 0:
        return d ** (2 - n) - big_r ** (2 - n)
    x_dual = big_r * big_r * x / (nx * nx)
    return d ** (2 - n) - (nx / big_r * np.linalg.norm(y - x_dual)) ** (2 - n)


def green_radial_avg(r, rho, ball: BallSpec):
    """Average of :func:`green_pointwise` over either sphere.

    Equals max(r, rho)^(2-N) - R^(2-N); vanishes when either radius reaches R.
    """
    big_r = ball.radius
    r_arr = np.asarray(r, dtype=np.float64)
    rho_arr = np.asarray(rho, dtype=np.float64)
    if np.any(r_arr > big_r) or np.any(rho_arr > big_r):
        raise DomainError("radii must lie in the closed ball")
    return newton_kernel(r, rho, ball.dim) - ball.image_factor


# -------------------------------------------------------------- radial potentials


_GX, _GW = np.polynomial.legendre.leggauss(6)


def _power_moment(r, v, d, k: int) -> np.ndarray:
    """Running integral of s^k phi(s)^2, phi the piecewise interpolant of (v, d).

    Each interval is integrated with 6-point Gauss-Legendre, exact for the
    cubic Hermite interpolant when k <= 5 (and for the linear one up to k = 9).
    A plain rule on r^k phi^2 loses all relative accuracy near the origin,
    where the moment itself is O(h^(k+1)).
    """
    h = np.diff(r)[:, None]
    t = 0.5 * (_GX + 1.0)[None, :]
    if d is None:
        vals = v[:-1, None] * (1.0 - t) + v[1:, None] * t
    else:
        t2, t3 = t * t, t * t * t
        vals = (v[:-1, None] * (2 * t3 - 3 * t2 + 1) + v[1:, None] * (3 * t2 - 2 * t3)
                + h * d[:-1, None] * (t3 - 2 * t2 + t) + h * d[1:, None] * (t3 - t2))
    s = r[:-1, None] + h * t
    pieces = 0.5 * h[:, 0] * ((s ** k * vals * vals) @ _GW)
    return np.concatenate(([0.0], np.cumsum(pieces)))


def moments(phi: RadialProfile):
    """Cumulative moments (q, m) of phi^2 on phi's grid."""
    n = phi.n
    omega = sphere_area(n)
    r, v = phi.r, phi.values
    d = phi.derivative if phi.smooth else None
    q = omega * _power_moment(r, v, d, 1)
    m = omega * _power_moment(r, v, d, n - 1)
    if r[0] > 0:
        # grid starting off the origin: add the Taylor piece on [0, r0]
        q = q + omega * v[0] ** 2 * r[0] ** 2 / 2.0
        m = m + omega * v[0] ** 2 * r[0] ** n / n
    return phi.with_values(q), phi.with_values(m)


def _u_from_moments(r, q, m, n):
    return q - weighted_power(r, 2 - n) * m


def u_potential(phi: RadialProfile) -> RadialProfile:
    """U(r) = int_{|y|<=r} (|y|^(2-N) - r^(2-N)) phi(y)^2 dy."""
    q, m = moments(phi)
    u = _u_from_moments(phi.r, q.values, m.values, phi.n)
    return phi.with_values(u)


def _end_moments(phi: RadialProfile):
    q, m = moments(phi)
    return q.values[-1], m.values[-1]


def lambda_of(phi: RadialProfile, ball: Optional[BallSpec] = None) -> float:
    """lambda(phi) = int |y|^(2-N) phi^2 - R^(2-N) int phi^2 - 1 over the ball."""
    ball = ball or phi.ball
    q_end, m_end = _end_moments(phi)
    return float(q_end - ball.image_factor * m_end - 1.0)


def v_potential(phi: RadialProfile, ball: Optional[BallSpec] = None) -> RadialProfile:
    """V(r): the ball-Green's-function potential of phi^2, i.e. -U(r) + q(R) - R^(2-N) m(R)."""
    ball = ball or phi.ball
    q, m = moments(phi)
    u = _u_from_moments(phi.r, q.values, m.values, phi.n)
    shift = q.values[-1] - ball.image_factor * m.values[-1]
    return phi.with_values(shift - u)
