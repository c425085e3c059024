# cython: language_level=3, boundscheck=False, wraparound=False, cdivision=True
"""Compiled Dormand-Prince 5(4) integrator for the augmented radial system.

State vector is (phi, dphi, q, m); see ``choquard._shoot_py`` for the
reference implementation this file mirrors step for step.
"""

import numpy as np
cimport numpy as cnp
from libc.math cimport fabs, sqrt, pow, fmin, fmax
from libc.stdlib cimport malloc, realloc, free

cnp.import_array()

cdef enum:
    NV = 4

cdef double C2 = 1.0 / 5.0, C3 = 3.0 / 10.0, C4 = 4.0 / 5.0, C5 = 8.0 / 9.0
cdef double A21 = 1.0 / 5.0
cdef double A31 = 3.0 / 40.0, A32 = 9.0 / 40.0
cdef double A41 = 44.0 / 45.0, A42 = -56.0 / 15.0, A43 = 32.0 / 9.0
cdef double A51 = 19372.0 / 6561.0, A52 = -25360.0 / 2187.0
cdef double A53 = 64448.0 / 6561.0, A54 = -212.0 / 729.0
cdef double A61 = 9017.0 / 3168.0, A62 = -355.0 / 33.0, A63 = 46732.0 / 5247.0
cdef double A64 = 49.0 / 176.0, A65 = -5103.0 / 18656.0
cdef double B1 = 35.0 / 384.0, B3 = 500.0 / 1113.0, B4 = 125.0 / 192.0
cdef double B5 = -2187.0 / 6784.0, B6 = 11.0 / 84.0
cdef double E1 = 71.0 / 57600.0, E3 = -71.0 / 16695.0, E4 = 71.0 / 1920.0
cdef double E5 = -17253.0 / 339200.0, E6 = 22.0 / 525.0, E7 = -1.0 / 40.0


cdef inline void rhs(double r, const double* y, double* f, int n, double omega) noexcept nogil:
    cdef double phi = y[0]
    cdef double u = y[2] - pow(r, 2 - n) * y[3]
    f[0] = y[1]
    f[1] = -(n - 1) * y[1] / r + (u - 1.0) * phi
    f[2] = omega * r * phi * phi
    f[3] = omega * pow(r, n - 1) * phi * phi


cdef inline double potential(double r, const double* y, int n) noexcept nogil:
    return y[2] - pow(r, 2 - n) * y[3]


cdef void dp5_step(double r, const double* y, const double* k1, double h,
                   int n, double omega, double* ynew, double* k7,
                   double* err) noexcept nogil:
    cdef double k2[NV]
    cdef double k3[NV]
    cdef double k4[NV]
    cdef double k5[NV]
    cdef double k6[NV]
    cdef double tmp[NV]
    cdef int i
    for i in range(NV):
        tmp[i] = y[i] + h * A21 * k1[i]
    rhs(r + C2 * h, tmp, k2, n, omega)
    for i in range(NV):
        tmp[i] = y[i] + h * (A31 * k1[i] + A32 * k2[i])
    rhs(r + C3 * h, tmp, k3, n, omega)
    for i in range(NV):
        tmp[i] = y[i] + h * (A41 * k1[i] + A42 * k2[i] + A43 * k3[i])
    rhs(r + C4 * h, tmp, k4, n, omega)
    for i in range(NV):
        tmp[i] = y[i] + h * (A51 * k1[i] + A52 * k2[i] + A53 * k3[i] + A54 * k4[i])
    rhs(r + C5 * h, tmp, k5, n, omega)
    for i in range(NV):
        tmp[i] = y[i] + h * (A61 * k1[i] + A62 * k2[i] + A63 * k3[i]
                             + A64 * k4[i] + A65 * k5[i])
    rhs(r + h, tmp, k6, n, omega)
    for i in range(NV):
        ynew[i] = y[i] + h * (B1 * k1[i] + B3 * k3[i] + B4 * k4[i]
                              + B5 * k5[i] + B6 * k6[i])
    rhs(r + h, ynew, k7, n, omega)
    for i in range(NV):
        err[i] = h * (E1 * k1[i] + E3 * k3[i] + E4 * k4[i] + E5 * k5[i]
                      + E6 * k6[i] + E7 * k7[i])


cdef struct Buffer:
    double* data
    Py_ssize_t size
    Py_ssize_t cap


cdef int push(Buffer* buf, double r, const double* y, const double* f) noexcept nogil:
    cdef double* grown
    cdef int i
    if buf.size == buf.cap:
        grown = <double*> realloc(buf.data, 2 * buf.cap * 9 * sizeof(double))
        if grown == NULL:
            return -1
        buf.data = grown
        buf.cap = 2 * buf.cap
    cdef double* row = buf.data + 9 * buf.size
    row[0] = r
    for i in range(NV):
        row[1 + i] = y[i]
        row[5 + i] = f[i]
    buf.size += 1
    return 0


cdef int run(double a, int n, double omega, double r_start, double r_max,
             double rtol, double atol, double event_tol, double decay_tol,
             double stop_radius, long max_steps, Buffer* buf) noexcept nogil:
    cdef double y[NV]
    cdef double f[NV]
    cdef double ynew[NV]
    cdef double fnew[NV]
    cdef double err[NV]
    cdef double yroot[NV]
    cdef double froot[NV]
    cdef double r = r_start, h, sc, enorm, factor, u, s, ds
    cdef int i, it
    cdef long steps = 0

    y[0] = a * (1.0 - r_start * r_start / (2.0 * n))
    y[1] = -a * r_start / n
    y[2] = 0.0
    y[3] = 0.0
    rhs(r, y, f, n, omega)
    if push(buf, r, y, f) != 0:
        return -3
    h = 1e-4 / fmax(1.0, sqrt(a))

    while True:
        if r >= r_max:
            return 0
        if steps >= max_steps:
            return -2
        if h < 1e-14 * fmax(1.0, r):
            return -1
        if r + h > r_max:
            h = r_max - r
        dp5_step(r, y, f, h, n, omega, ynew, fnew, err)
        steps += 1
        enorm = 0.0
        for i in range(NV):
            sc = atol + rtol * fmax(fabs(y[i]), fabs(ynew[i]))
            enorm += (err[i] / sc) * (err[i] / sc)
        enorm = sqrt(enorm / NV)
        if enorm > 1.0:
            h *= fmax(0.2, 0.9 * pow(enorm, -0.2))
            continue

        if ynew[0] <= 0.0:
            # Newton on the step length, each iterate a fresh single step from (r, y)
            s = h * y[0] / (y[0] - ynew[0])
            for it in range(60):
                dp5_step(r, y, f, s, n, omega, yroot, froot, err)
                ds = yroot[0] / yroot[1]
                s -= ds
                if s <= 0.0:
                    s = 0.5 * (s + ds)
                if s > h:
                    s = h
                if fabs(ds) <= event_tol:
                    break
            dp5_step(r, y, f, s, n, omega, yroot, froot, err)
            if push(buf, r + s, yroot, froot) != 0:
                return -3
            return 1

        r += h
        for i in range(NV):
            y[i] = ynew[i]
            f[i] = fnew[i]
        if push(buf, r, y, f) != 0:
            return -3

        u = potential(r, y, n)
        if y[0] > a:
            return 2
        if y[1] > 0.0 and y[0] > decay_tol and u > 1.0:
            return 2
        if stop_radius > 0.0 and u > 1.0 and r * sqrt(u - 1.0) > stop_radius:
            return 3

        if enorm == 0.0:
            factor = 5.0
        else:
            factor = fmin(5.0, fmax(0.2, 0.9 * pow(enorm, -0.2)))
        h *= factor


def shoot(double a, int n, double omega, double r_start, double r_max,
          double rtol, double atol, double event_tol, double decay_tol,
          double stop_radius, long max_steps):
    """Integrate one trajectory; returns (status, r, y, dy) as numpy arrays."""
    cdef Buffer buf
    cdef int status
    buf.cap = 1024
    buf.size = 0
    buf.data = <double*> malloc(buf.cap * 9 * sizeof(double))
    if buf.data == NULL:
        raise MemoryError()
    try:
        with nogil:
            status = run(a, n, omega, r_start, r_max, rtol, atol, event_tol,
                         decay_tol, stop_radius, max_steps, &buf)
        if status == -3:
            raise MemoryError()
        out = np.empty((buf.size, 9), dtype=np.float64)
        if buf.size:
            out[:, :] = np.asarray(<double[:buf.size, :9]> buf.data)
    finally:
        free(buf.data)
    return status, out[:, 0].copy(), out[:, 1:5].copy(), out[:, 5:9].copy()
