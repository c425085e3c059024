"""Pure-Python Dormand-Prince 5(4) integrator for the augmented radial system.

The state is ``(phi, dphi, q, m)`` with

    phi'  = dphi
    dphi' = -(n-1)/r dphi + (U - 1) phi,   U = q - r^(2-n) m
    q'    = omega r phi^2
    m'    = omega r^(n-1) phi^2

This is the fallback used when the compiled ``_shoot`` extension is not
available; both run the same step-size controller and event logic, and
agree to round-off.
"""

import math

import numpy as np

C2, C3, C4, C5 = 1 / 5, 3 / 10, 4 / 5, 8 / 9
A21 = 1 / 5
A31, A32 = 3 / 40, 9 / 40
A41, A42, A43 = 44 / 45, -56 / 15, 32 / 9
A51, A52, A53, A54 = 19372 / 6561, -25360 / 2187, 64448 / 6561, -212 / 729
A61, A62, A63, A64, A65 = 9017 / 3168, -355 / 33, 46732 / 5247, 49 / 176, -5103 / 18656
B1, B3, B4, B5, B6 = 35 / 384, 500 / 1113, 125 / 192, -2187 / 6784, 11 / 84
E1, E3, E4, E5, E6, E7 = (71 / 57600, -71 / 16695, 71 / 1920, -17253 / 339200,
                          22 / 525, -1 / 40)


def _rhs(r, y, n, omega):
    phi, dphi, q, m = y
    u = q - r ** (2 - n) * m
    return (dphi,
            -(n - 1) * dphi / r + (u - 1.0) * phi,
            omega * r * phi * phi,
            omega * r ** (n - 1) * phi * phi)


def _step(r, y, k1, h, n, omega):
    def comb(*terms):
        return tuple(y[i] + h * sum(c * k[i] for c, k in terms) for i in range(4))

    k2 = _rhs(r + C2 * h, comb((A21, k1)), n, omega)
    k3 = _rhs(r + C3 * h, comb((A31, k1), (A32, k2)), n, omega)
    k4 = _rhs(r + C4 * h, comb((A41, k1), (A42, k2), (A43, k3)), n, omega)
    k5 = _rhs(r + C5 * h, comb((A51, k1), (A52, k2), (A53, k3), (A54, k4)), n, omega)
    k6 = _rhs(r + h, comb((A61, k1), (A62, k2), (A63, k3), (A64, k4), (A65, k5)), n, omega)
    ynew = comb((B1, k1), (B3, k3), (B4, k4), (B5, k5), (B6, k6))
    k7 = _rhs(r + h, ynew, n, omega)
    err = tuple(h * (E1 * k1[i] + E3 * k3[i] + E4 * k4[i] + E5 * k5[i]
                     + E6 * k6[i] + E7 * k7[i]) for i in range(4))
    return ynew, k7, err


def shoot(a, n, omega, r_start, r_max, rtol, atol, event_tol, decay_tol,
          stop_radius, max_steps):
    """Integrate one trajectory; returns (status, r, y, dy) as numpy arrays.

    Status codes: 0 reached ``r_max``, 1 crossed zero (last row is the root),
    2 diverged, 3 passed ``stop_radius`` in scaled units, -1 step underflow,
    -2 step budget exhausted.
    """
    r = r_start
    y = (a * (1.0 - r_start * r_start / (2.0 * n)), -a * r_start / n, 0.0, 0.0)
    f = _rhs(r, y, n, omega)
    rows = [(r, y, f)]
    h = 1e-4 / max(1.0, math.sqrt(a))
    steps = 0

    def finish(status):
        rr = np.array([row[0] for row in rows])
        yy = np.array([row[1] for row in rows], dtype=np.float64)
        ff = np.array([row[2] for row in rows], dtype=np.float64)
        return status, rr, yy, ff

    while True:
        if r >= r_max:
            return finish(0)
        if steps >= max_steps:
            return finish(-2)
        if h < 1e-14 * max(1.0, r):
            return finish(-1)
        if r + h > r_max:
            h = r_max - r
        ynew, fnew, err = _step(r, y, f, h, n, omega)
        steps += 1
        enorm = 0.0
        for i in range(4):
            sc = atol + rtol * max(abs(y[i]), abs(ynew[i]))
            enorm += (err[i] / sc) ** 2
        enorm = math.sqrt(enorm / 4)
        if enorm > 1.0:
            h *= max(0.2, 0.9 * enorm ** -0.2)
            continue

        if ynew[0] <= 0.0:
            s = h * y[0] / (y[0] - ynew[0])
            for _ in range(60):
                yroot, _, _ = _step(r, y, f, s, n, omega)
                ds = yroot[0] / yroot[1]
                s -= ds
                if s <= 0.0:
                    s = 0.5 * (s + ds)
                if s > h:
                    s = h
                if abs(ds) <= event_tol:
                    break
            yroot, froot, _ = _step(r, y, f, s, n, omega)
            rows.append((r + s, yroot, froot))
            return finish(1)

        r += h
        y, f = ynew, fnew
        rows.append((r, y, f))

        u = y[2] - r ** (2 - n) * y[3]
        if y[0] > a:
            return finish(2)
        if y[1] > 0.0 and y[0] > decay_tol and u > 1.0:
            return finish(2)
        if stop_radius > 0.0 and u > 1.0 and r * math.sqrt(u - 1.0) > stop_radius:
            return finish(3)

        factor = 5.0 if enorm == 0.0 else min(5.0, max(0.2, 0.9 * enorm ** -0.2))
        h *= factor
