"""Hot loops.

Every kernel exists twice: a loop version compiled with numba (1D and 2D)
and a vectorized numpy version that handles any dimension. ``dual_tv``
picks one according to :mod:`tvdd._accel`.

The dual iteration solves

    min_w ||w - f||^2_F + 2 alpha TV(w)   subject to   w = f on ~F

where ``F`` is the boolean ``free`` mask. With every point free this is
plain TV denoising and ``f - w`` is the projection of ``f`` onto alpha K.
The dual field ``p`` is updated in place, so callers can warm start.
"""

import math

import numpy as np

from . import _accel
from .grid import divergence, gradient, pointwise_norm


@_accel.njit
def _dual_tv_1d_loop(f, free, alpha, tau, max_iters, tol, p):
    n = f.shape[0]
    w = np.empty(n)
    s = tau / alpha
    delta = np.inf
    it = 0
    while it < max_iters:
        it += 1
        for i in range(n):
            if free[i]:
                dv = 0.0
                if i < n - 1:
                    dv += p[i]
                if i > 0:
                    dv -= p[i - 1]
                w[i] = f[i] - alpha * dv
            else:
                w[i] = f[i]
        delta = 0.0
        for i in range(n - 1):
            gi = w[i + 1] - w[i]
            new = (p[i] - s * gi) / (1.0 + s * abs(gi))
            dp = abs(new - p[i])
            if dp > delta:
                delta = dp
            p[i] = new
        if delta <= tol:
            break
    for i in range(n):
        if free[i]:
            dv = 0.0
            if i < n - 1:
                dv += p[i]
            if i > 0:
                dv -= p[i - 1]
            w[i] = f[i] - alpha * dv
        else:
            w[i] = f[i]
    return w, it, delta


@_accel.njit
def _primal_2d(f, free, alpha, p0, p1, w):
    n0, n1 = f.shape
    for i in range(n0):
        for j in range(n1):
            dv = 0.0
            if i < n0 - 1:
                dv += p0[i, j]
            if i > 0:
                dv -= p0[i - 1, j]
            if j < n1 - 1:
                dv += p1[i, j]
            if j > 0:
                dv -= p1[i, j - 1]
            w[i, j] = f[i, j] - alpha * dv if free[i, j] else f[i, j]


@_accel.njit
def _dual_tv_2d_loop(f, free, alpha, tau, max_iters, tol, p0, p1):
    n0, n1 = f.shape
    w = np.empty((n0, n1))
    g0 = np.zeros((n0, n1))
    g1 = np.zeros((n0, n1))
    s = tau / alpha
    delta = np.inf
    it = 0
    while it < max_iters:
        it += 1
        _primal_2d(f, free, alpha, p0, p1, w)
        for i in range(n0 - 1):
            for j in range(n1):
                g0[i, j] = w[i + 1, j] - w[i, j]
        for i in range(n0):
            for j in range(n1 - 1):
                g1[i, j] = w[i, j + 1] - w[i, j]
        delta = 0.0
        for i in range(n0):
            for j in range(n1):
                a0 = g0[i, j]
                a1 = g1[i, j]
                den = 1.0 + s * math.sqrt(a0 * a0 + a1 * a1)
                q0 = (p0[i, j] - s * a0) / den
                q1 = (p1[i, j] - s * a1) / den
                delta = max(delta, abs(q0 - p0[i, j]), abs(q1 - p1[i, j]))
                p0[i, j] = q0
                p1[i, j] = q1
        if delta <= tol:
            break
    _primal_2d(f, free, alpha, p0, p1, w)
    return w, it, delta


def dual_tv_numpy(f, free, alpha, tau, max_iters, tol, p):
    """Vectorized form of the dual iteration, any dimension."""
    s = tau / alpha
    pinned = ~free
    delta = np.inf
    it = 0

    def primal():
        w = f - alpha * divergence(p)
        w[pinned] = f[pinned]
        return w

    while it < max_iters:
        it += 1
        gw = gradient(primal())
        new = (p - s * gw) / (1.0 + s * pointwise_norm(gw))
        delta = float(np.max(np.abs(new - p))) if p.size else 0.0
        p[...] = new
        if delta <= tol:
            break
    return primal(), it, delta


def dual_tv(f, free, alpha, tau, max_iters, tol, p, use_numba=None):
    """Run the dual TV iteration; returns ``(w, iterations, last_increment)``.

    ``p`` has shape ``(f.ndim,) + f.shape`` and is modified in place.
    """
    if use_numba is None:
        use_numba = _accel.USE_NUMBA
    f = np.ascontiguousarray(f, dtype=np.float64)
    free = np.ascontiguousarray(free, dtype=np.bool_)
    if use_numba and _accel.HAVE_NUMBA and f.ndim in (1, 2):
        if f.ndim == 1:
            return _dual_tv_1d_loop(f, free, float(alpha), float(tau), int(max_iters), float(tol), p[0])
        return _dual_tv_2d_loop(
            f, free, float(alpha), float(tau), int(max_iters), float(tol), p[0], p[1]
        )
    return dual_tv_numpy(f, free, alpha, tau, max_iters, tol, p)


@_accel.njit
def _taut_string_loop(g, alpha):
    n = g.shape[0]
    cum = np.zeros(n + 1)
    for k in range(n):
        cum[k + 1] = cum[k] + g[k]
    lo = cum - alpha
    hi = cum + alpha
    lo[0] = hi[0] = 0.0
    lo[n] = hi[n] = cum[n]
    x = np.empty(n)
    i0 = 0
    y0 = 0.0
    while i0 < n:
        smin = -np.inf
        smax = np.inf
        kmin = i0
        kmax = i0
        k = i0 + 1
        while True:
            slo = (lo[k] - y0) / (k - i0)
            shi = (hi[k] - y0) / (k - i0)
            if slo > smax:
                # string is pushed up against the upper tube wall at kmax
                for t in range(i0, kmax):
                    x[t] = smax
                y0 = hi[kmax]
                i0 = kmax
                break
            if shi < smin:
                for t in range(i0, kmin):
                    x[t] = smin
                y0 = lo[kmin]
                i0 = kmin
                break
            if slo >= smin:
                smin = slo
                kmin = k
            if shi <= smax:
                smax = shi
                kmax = k
            if k == n:
                for t in range(i0, n):
                    x[t] = smin
                i0 = n
                break
            k += 1
    return x


def taut_string(g, alpha):
    """Exact minimizer of ``||u - g||^2 + 2 alpha TV(u)`` for 1D ``g``."""
    g = np.ascontiguousarray(g, dtype=np.float64)
    return _taut_string_loop(g, float(alpha))
