"""Discrete calculus on a regular d-dimensional grid.

Signals are plain ``float64`` arrays of shape ``(N_1, ..., N_d)``. A dual
field is an array of shape ``(d, N_1, ..., N_d)`` whose component ``j`` holds
forward differences along array axis ``j``; it vanishes on the last slice of
that axis. Grid spacing is taken to be one in every direction.
"""

from dataclasses import dataclass

import numpy as np


@dataclass(frozen=True)
class GridShape:
    dims: tuple

    def __post_init__(self):
        dims = tuple(int(n) for n in self.dims)
        if len(dims) < 1 or any(n < 1 for n in dims):
            raise ValueError(f"invalid grid dimensions {self.dims!r}")
        object.__setattr__(self, "dims", dims)

    @property
    def d(self):
        return len(self.dims)

    @property
    def size(self):
        return int(np.prod(self.dims))

    @classmethod
    def of(cls, u):
        return cls(np.shape(u))


def as_signal(u):
    u = np.asarray(u, dtype=np.float64)
    if u.ndim == 0:
        raise ValueError("a signal needs at least one axis")
    if not np.all(np.isfinite(u)):
        raise ValueError("signal contains non-finite values")
    return u


def gradient(u):
    """Forward differences of ``u`` along every axis.

    Returns an array of shape ``(u.ndim,) + u.shape``; component ``j`` is
    zero on the last slice of axis ``j``.
    """
    u = np.asarray(u, dtype=np.float64)
    p = np.zeros((u.ndim,) + u.shape)
    for j in range(u.ndim):
        lead = [slice(None)] * u.ndim
        lead[j] = slice(0, -1)
        p[(j,) + tuple(lead)] = np.diff(u, axis=j)
    return p


def divergence(p):
    """Negative adjoint of :func:`gradient`.

    For every signal ``u`` and field ``p`` of matching shape,
    ``<gradient(u), p> == -<u, divergence(p)>`` up to rounding. Values of
    ``p[j]`` on the last slice of axis ``j`` do not contribute.
    """
    p = np.asarray(p, dtype=np.float64)
    d = p.shape[0]
    if p.ndim != d + 1:
        raise ValueError(
            f"dual field of shape {p.shape} does not carry one component per axis"
        )
    shape = p.shape[1:]
    out = np.zeros(shape)
    for j in range(d):
        n = shape[j]
        if n == 1:
            continue
        pj = p[j]
        sl = [slice(None)] * d

        def at(a, b):
            s = list(sl)
            s[j] = slice(a, b)
            return tuple(s)

        # -grad^T: out[0] = p[0], out[i] = p[i] - p[i-1], out[n-1] = -p[n-2]
        out[at(0, n - 1)] += pj[at(0, n - 1)]
        out[at(1, n)] -= pj[at(0, n - 1)]
    return out


def pointwise_norm(p):
    return np.sqrt(np.sum(p * p, axis=0))


def total_variation(u):
    """Isotropic total variation: sum of gradient magnitudes."""
    return float(np.sum(pointwise_norm(gradient(u))))


def inner(u, v):
    return float(np.vdot(np.ravel(u), np.ravel(v)))


def energy(u, T, g, alpha):
    """Objective ``||T u - g||^2 + 2 alpha TV(u)``."""
    if alpha <= 0:
        raise ValueError("alpha must be positive")
    g = np.asarray(g, dtype=np.float64)
    r = T.apply(u)
    if r.shape != g.shape:
        raise ValueError(f"data of shape {g.shape} does not match operator range {r.shape}")
    r = r - g
    return float(np.dot(r, r)) + 2.0 * alpha * total_variation(u)
