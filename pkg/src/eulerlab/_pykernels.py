"""Pure numpy implementations of the hot kernels.

These are the reference semantics; ``_ckernels.pyx`` must reproduce them.
Nodes are ``x0 + i*dx``.  Periodic grids hold ``n`` nodes with period
``n*dx``; non-periodic grids hold all nodes including both ends and clamp
evaluation points to the end values.
"""

import numpy as np


def derivative(f, dx, periodic):
    """Fourth-order finite-difference derivative (one-sided near open ends).

    Stencils are summed as differences so constant data gives exact zeros.
    """
    f = np.asarray(f, dtype=float)
    n = f.shape[0]
    w = 1.0 / (12.0 * dx)
    if periodic:
        return ((np.roll(f, 2) - np.roll(f, -2)) + 8.0 * (np.roll(f, -1) - np.roll(f, 1))) * w
    if n < 5:
        raise ValueError("need at least 5 nodes for the one-sided stencils")
    d = np.empty(n)
    d[2:-2] = ((f[:-4] - f[4:]) + 8.0 * (f[3:-1] - f[1:-3])) * w
    d[0] = (48.0 * (f[1] - f[0]) - 36.0 * (f[2] - f[0]) + 16.0 * (f[3] - f[0]) - 3.0 * (f[4] - f[0])) * w
    d[1] = (-3.0 * (f[0] - f[1]) + 18.0 * (f[2] - f[1]) - 6.0 * (f[3] - f[1]) + (f[4] - f[1])) * w
    d[-1] = -(48.0 * (f[-2] - f[-1]) - 36.0 * (f[-3] - f[-1]) + 16.0 * (f[-4] - f[-1]) - 3.0 * (f[-5] - f[-1])) * w
    d[-2] = -(-3.0 * (f[-1] - f[-2]) + 18.0 * (f[-3] - f[-2]) - 6.0 * (f[-4] - f[-2]) + (f[-5] - f[-2])) * w
    return d


def node_slopes(f, dx, periodic):
    """Hyman-limited node slopes for a monotone cubic Hermite interpolant."""
    f = np.asarray(f, dtype=float)
    d = derivative(f, dx, periodic)
    if periodic:
        right = (np.roll(f, -1) - f) / dx
        left = np.roll(right, 1)
    else:
        sec = np.diff(f) / dx
        left = np.concatenate(([sec[0]], sec))
        right = np.concatenate((sec, [sec[-1]]))
    same = left * right > 0.0
    bound = 3.0 * np.minimum(np.abs(left), np.abs(right))
    limited = np.sign(right) * np.minimum(np.abs(d), bound)
    limited[d * right <= 0.0] = 0.0
    return np.where(same, limited, 0.0)


def _locate(x0, dx, n, periodic, pts):
    xi = (np.asarray(pts, dtype=float) - x0) / dx
    if periodic:
        j = np.floor(xi)
        th = xi - j
        j = j.astype(np.int64) % n
        return j, (j + 1) % n, th, 0
    last = n - 1
    clamped = int(np.count_nonzero((xi < 0.0) | (xi > last)))
    xi = np.clip(xi, 0.0, float(last))
    j = np.minimum(np.floor(xi).astype(np.int64), last - 1)
    return j, j + 1, xi - j, clamped


def hermite_eval(f, d, x0, dx, pts, periodic):
    """Evaluate the cubic Hermite interpolant at ``pts``; returns ``(values, n_clamped)``."""
    f = np.asarray(f, dtype=float)
    d = np.asarray(d, dtype=float)
    j, k, t, clamped = _locate(x0, dx, f.shape[0], periodic, pts)
    t2 = t * t
    omt = 1.0 - t
    h10 = t * omt * omt
    h01 = t2 * (3.0 - 2.0 * t)
    h11 = t2 * (t - 1.0)
    # written around f[j] so flat data is reproduced exactly
    fj = f[j]
    return fj + h01 * (f[k] - fj) + dx * (h10 * d[j] + h11 * d[k]), clamped


def linear_eval(f, x0, dx, pts, periodic):
    f = np.asarray(f, dtype=float)
    j, k, t, clamped = _locate(x0, dx, f.shape[0], periodic, pts)
    fj = f[j]
    return fj + t * (f[k] - fj), clamped
