# cython: language_level=3, boundscheck=False, wraparound=False, cdivision=True
"""Compiled versions of the kernels in ``_pykernels``; same signatures."""

import numpy as np
cimport numpy as cnp
from libc.math cimport floor, fabs

cnp.import_array()


cdef inline double _min(double a, double b) nogil:
    return a if a < b else b


cdef inline Py_ssize_t _wrap(Py_ssize_t i, Py_ssize_t n) nogil:
    if i < 0:
        return i + n
    if i >= n:
        return i - n
    return i


def derivative(f_in, double dx, bint periodic):
    cdef const double[::1] f = np.ascontiguousarray(f_in, dtype=np.float64)
    cdef Py_ssize_t n = f.shape[0]
    cdef Py_ssize_t i, k
    out = np.empty(n)
    cdef double[::1] d = out
    cdef double w = 1.0 / (12.0 * dx)
    if n < 5:
        raise ValueError("need at least 5 nodes")
    with nogil:
        for i in range(2, n - 2):
            d[i] = ((f[i - 2] - f[i + 2]) + 8.0 * (f[i + 1] - f[i - 1])) * w
        if periodic:
            for k in range(4):
                i = k if k < 2 else n - 4 + k
                d[i] = ((f[_wrap(i - 2, n)] - f[_wrap(i + 2, n)])
                        + 8.0 * (f[_wrap(i + 1, n)] - f[_wrap(i - 1, n)])) * w
        else:
            d[0] = (48.0 * (f[1] - f[0]) - 36.0 * (f[2] - f[0])
                    + 16.0 * (f[3] - f[0]) - 3.0 * (f[4] - f[0])) * w
            d[1] = (-3.0 * (f[0] - f[1]) + 18.0 * (f[2] - f[1])
                    - 6.0 * (f[3] - f[1]) + (f[4] - f[1])) * w
            d[n - 1] = -(48.0 * (f[n - 2] - f[n - 1]) - 36.0 * (f[n - 3] - f[n - 1])
                         + 16.0 * (f[n - 4] - f[n - 1]) - 3.0 * (f[n - 5] - f[n - 1])) * w
            d[n - 2] = -(-3.0 * (f[n - 1] - f[n - 2]) + 18.0 * (f[n - 3] - f[n - 2])
                         - 6.0 * (f[n - 4] - f[n - 2]) + (f[n - 5] - f[n - 2])) * w
    return out


cdef inline double _limit(double left, double right, double di) nogil:
    cdef double bound
    if left * right > 0.0 and di * right > 0.0:
        bound = 3.0 * _min(fabs(left), fabs(right))
        if fabs(di) > bound:
            return bound if right > 0.0 else -bound
        return di
    return 0.0


def node_slopes(f_in, double dx, bint periodic):
    cdef const double[::1] f = np.ascontiguousarray(f_in, dtype=np.float64)
    cdef Py_ssize_t n = f.shape[0]
    out = derivative(f_in, dx, periodic)
    cdef double[::1] d = out
    cdef Py_ssize_t i
    cdef double left, right
    with nogil:
        for i in range(1, n - 1):
            d[i] = _limit((f[i] - f[i - 1]) / dx, (f[i + 1] - f[i]) / dx, d[i])
        if periodic:
            d[0] = _limit((f[0] - f[n - 1]) / dx, (f[1] - f[0]) / dx, d[0])
            d[n - 1] = _limit((f[n - 1] - f[n - 2]) / dx, (f[0] - f[n - 1]) / dx, d[n - 1])
        else:
            right = (f[1] - f[0]) / dx
            d[0] = _limit(right, right, d[0])
            right = (f[n - 1] - f[n - 2]) / dx
            d[n - 1] = _limit(right, right, d[n - 1])
    return out


def hermite_eval(f_in, d_in, double x0, double dx, pts_in, bint periodic):
    cdef const double[::1] f = np.ascontiguousarray(f_in, dtype=np.float64)
    cdef const double[::1] d = np.ascontiguousarray(d_in, dtype=np.float64)
    cdef const double[::1] pts = np.ascontiguousarray(pts_in, dtype=np.float64)
    cdef Py_ssize_t n = f.shape[0]
    cdef Py_ssize_t m = pts.shape[0]
    out = np.empty(m)
    cdef double[::1] o = out
    cdef Py_ssize_t i, j, k
    cdef double xi, t, omt, t2, fj
    cdef long clamped = 0
    cdef double last = <double>(n - 1)
    cdef double inv_dx = 1.0 / dx
    with nogil:
        for i in range(m):
            xi = (pts[i] - x0) * inv_dx
            if periodic:
                fj = floor(xi)
                t = xi - fj
                j = <Py_ssize_t>fj
                if j < 0 or j >= n:
                    j = j % n
                    if j < 0:
                        j += n
                k = j + 1 if j + 1 < n else 0
            else:
                if xi < 0.0:
                    xi = 0.0
                    clamped += 1
                elif xi > last:
                    xi = last
                    clamped += 1
                j = <Py_ssize_t>floor(xi)
                if j > n - 2:
                    j = n - 2
                k = j + 1
                t = xi - j
            omt = 1.0 - t
            t2 = t * t
            o[i] = (f[j] + t2 * (3.0 - 2.0 * t) * (f[k] - f[j])
                    + dx * (t * omt * omt * d[j] + t2 * (t - 1.0) * d[k]))
    return out, clamped


def linear_eval(f_in, double x0, double dx, pts_in, bint periodic):
    cdef const double[::1] f = np.ascontiguousarray(f_in, dtype=np.float64)
    cdef const double[::1] pts = np.ascontiguousarray(pts_in, dtype=np.float64)
    cdef Py_ssize_t n = f.shape[0]
    cdef Py_ssize_t m = pts.shape[0]
    out = np.empty(m)
    cdef double[::1] o = out
    cdef Py_ssize_t i, j, k
    cdef double xi, t, fj
    cdef long clamped = 0
    cdef double last = <double>(n - 1)
    cdef double inv_dx = 1.0 / dx
    with nogil:
        for i in range(m):
            xi = (pts[i] - x0) * inv_dx
            if periodic:
                fj = floor(xi)
                t = xi - fj
                j = <Py_ssize_t>fj
                if j < 0 or j >= n:
                    j = j % n
                    if j < 0:
                        j += n
                k = j + 1 if j + 1 < n else 0
            else:
                if xi < 0.0:
                    xi = 0.0
                    clamped += 1
                elif xi > last:
                    xi = last
                    clamped += 1
                j = <Py_ssize_t>floor(xi)
                if j > n - 2:
                    j = n - 2
                k = j + 1
                t = xi - j
            o[i] = f[j] + t * (f[k] - f[j])
    return out, clamped
