"""Reference solutions used to verify the decomposition solvers."""

from dataclasses import dataclass

import numpy as np

from .grid import energy
from .kernels import taut_string
from .prox import ProjectionConfig, tv_denoise


@dataclass
class OracleInfo:
    iterations: int
    increment: float
    converged: bool


def oracle_minimize(
    T,
    g,
    alpha,
    *,
    max_iters=20000,
    tol=1e-10,
    projection=None,
    projection_tol_floor=1e-10,
    full_output=False,
):
    """Single-domain minimizer of ``||T u - g||^2 + 2 alpha TV(u)``.

    Iterates ``u <- tv_denoise(u + T*(g - T u), alpha)`` from ``u = 0``,
    which is the one-subdomain case of the surrogate scheme. Requires
    ``||T|| < 1``. The dual field of the projection is carried over between
    iterations and its tolerance tightened geometrically.
    """
    g = np.asarray(g, dtype=np.float64)
    projection = projection or ProjectionConfig(max_iters=50000, tol=1e-4)
    u = np.zeros(T.shape)
    p = None
    inc = np.inf
    k = 0
    for k in range(1, max_iters + 1):
        ptol = max(projection.tol * 0.9**k, projection_tol_floor)
        v = u + T.adjoint(g - T.apply(u))
        u_new, info = tv_denoise(v, alpha, projection.with_tol(ptol), p0=p, full_output=True)
        p = info.dual
        inc = float(np.linalg.norm(u_new - u))
        u = u_new
        if inc <= tol:
            break
    info = OracleInfo(k, inc, inc <= tol)
    return (u, info) if full_output else u


def taut_string_1d(g, alpha):
    """Exact 1D TV denoising by the taut-string construction.

    Pulls a string through the tube of radius ``alpha`` around the running
    sum of ``g``; the slopes of the taut string are the minimizer of
    ``||u - g||^2 + 2 alpha TV(u)``.
    """
    g = np.asarray(g, dtype=np.float64)
    if g.ndim != 1:
        raise ValueError("taut string works on 1D signals only")
    if alpha <= 0:
        return g.copy()
    return taut_string(g, alpha)


def check_optimality(u, T, g, alpha, trials=50, seed=0):
    """Largest directional decrease rate of the objective around ``u``.

    Returns ``max (J(u) - J(u + eps v)) / eps`` over unit directions ``v``
    and ``eps`` in {1e-3, 1e-2}. The directions are ``trials`` random ones
    plus two probes that random sampling tends to miss in high dimension:
    the data-fit descent direction ``T*(g - T u)`` and the forward-backward
    step direction. A minimizer gives a value at most zero.
    """
    u = np.asarray(u, dtype=np.float64)
    g = np.asarray(g, dtype=np.float64)
    rng = np.random.default_rng(seed)
    base = energy(u, T, g, alpha)
    grad = T.adjoint(g - T.apply(u))
    fb = tv_denoise(u + grad, alpha, ProjectionConfig(max_iters=20000, tol=1e-9)) - u
    dirs = [grad, fb] + [rng.standard_normal(u.shape) for _ in range(trials)]
    worst = -np.inf
    for v in dirs:
        nv = np.linalg.norm(v)
        if nv == 0.0:
            continue
        v = v / nv
        for eps in (1e-3, 1e-2):
            worst = max(worst, (base - energy(u + eps * v, T, g, alpha)) / eps)
    return float(worst)
