"""Projection onto alpha K and the TV proximity operator."""

from dataclasses import dataclass, replace
import logging
import math

import numpy as np

from . import kernels
from .grid import as_signal, gradient, pointwise_norm

log = logging.getLogger(__name__)


@dataclass(frozen=True)
class ProjectionConfig:
    """Settings for the dual projection iteration.

    ``tau=None`` selects ``1 / (4 d)`` for a d-dimensional signal. The
    iteration stops once the sup-norm change of the scaled dual field
    ``alpha p`` drops to ``tol`` or after ``max_iters`` sweeps. Measuring
    the scaled field keeps the primal change within ``4 d tol`` whatever
    the value of alpha.

    A small increment does not mean the primal iterate is accurate when the
    iteration contracts slowly. If ``error_tol`` is set, sweeps continue
    until the duality gap certifies ``||w - w*|| <= error_tol`` (or the gap
    falls to rounding level), still capped by ``max_iters``.
    """

    tau: float = None
    max_iters: int = 2000
    tol: float = 1e-6
    error_tol: float = None

    def __post_init__(self):
        if self.tau is not None and self.tau <= 0:
            raise ValueError("tau must be positive")
        if self.max_iters < 1:
            raise ValueError("max_iters must be positive")
        if self.tol < 0:
            raise ValueError("tol must be nonnegative")
        if self.error_tol is not None and self.error_tol <= 0:
            raise ValueError("error_tol must be positive")

    def step(self, d):
        limit = 1.0 / (4 * d)
        if self.tau is None:
            return limit
        if self.tau > limit * (1 + 1e-12):
            raise ValueError(f"tau={self.tau} exceeds the stable bound 1/(4d)={limit}")
        return self.tau

    def with_tol(self, tol):
        return replace(self, tol=tol)

    def tightened(self, factor):
        """Both tolerances scaled by ``factor`` and twice the sweep budget."""
        err = None if self.error_tol is None else self.error_tol * factor
        return replace(self, tol=self.tol * factor, error_tol=err, max_iters=self.max_iters * 2)


@dataclass
class ProjectionInfo:
    iterations: int
    residual: float
    converged: bool
    dual: np.ndarray
    error_bound: float = None


def _check_dual(p, shape):
    want = (len(shape),) + tuple(shape)
    if p is None:
        return np.zeros(want)
    if p.shape != want:
        raise ValueError(f"dual field has shape {p.shape}, expected {want}")
    return p


def error_bound(w, p, alpha):
    """Certified bound on ``||w - w*||`` from the duality gap.

    With ``w = f - alpha div p`` on the free points and ``|p| <= 1`` the gap
    is ``alpha * sum(|grad w| + <p, grad w>)`` and bounds half the squared
    distance to the minimizer. Also returns the rounding level of the gap.
    """
    gw = gradient(w)
    mag = pointwise_norm(gw)
    terms = mag + np.sum(p * gw, axis=0)
    gap = alpha * float(np.sum(terms))
    noise = 16 * np.finfo(float).eps * alpha * float(np.sum(mag))
    return math.sqrt(2 * max(gap, 0.0)), noise, gap


def constrained_prox(f, free, alpha, cfg=None, p0=None):
    """TV prox with pinned values.

    Minimizes ``||w - f||^2`` over the ``free`` points plus
    ``2 alpha TV(w)``, with ``w`` equal to ``f`` wherever ``free`` is False.
    ``p0`` (modified in place when given) warm starts the dual field.

    Returns ``(w, info)``.
    """
    if alpha <= 0:
        raise ValueError("alpha must be positive")
    cfg = cfg or ProjectionConfig()
    f = np.asarray(f, dtype=np.float64)
    free = np.asarray(free, dtype=bool)
    if free.shape != f.shape:
        raise ValueError("free mask and signal differ in shape")
    p = _check_dual(p0, f.shape)
    tau = cfg.step(f.ndim)
    w, it, delta = kernels.dual_tv(f, free, alpha, tau, cfg.max_iters, cfg.tol / alpha, p)
    it = int(it)
    ok = float(delta) * alpha <= cfg.tol * (1 + 1e-12)
    bound = None
    if cfg.error_tol is not None:
        bound, noise, gap = error_bound(w, p, alpha)
        chunk = max(it, 32)
        while bound > cfg.error_tol and gap > noise and it < cfg.max_iters:
            w, k, delta = kernels.dual_tv(f, free, alpha, tau, min(chunk, cfg.max_iters - it), 0.0, p)
            it += int(k)
            chunk *= 2
            bound, noise, gap = error_bound(w, p, alpha)
        ok = ok and (bound <= cfg.error_tol or gap <= noise)
    delta = float(delta) * alpha
    info = ProjectionInfo(it, delta, bool(ok), p, bound)
    if not info.converged:
        log.debug("dual iteration stopped at %d sweeps, residual %.3e", it, delta)
    return w, info


def project_onto_alphaK(g, alpha, cfg=None, *, p0=None, full_output=False):
    """Orthogonal projection of ``g`` onto ``alpha K``.

    K is the set of divergences of fields bounded by one pointwise; the
    result is ``alpha * div p`` for the dual field reached by the
    semi-implicit iteration started at ``p0`` (zero by default).
    Non-convergence is reported through ``info.converged`` rather than
    raised.
    """
    g = as_signal(g)
    w, info = constrained_prox(g, np.ones(g.shape, dtype=bool), alpha, cfg, p0)
    pi = g - w
    return (pi, info) if full_output else pi


def tv_denoise(g, alpha, cfg=None, *, p0=None, full_output=False):
    """Minimizer of ``||u - g||^2 + 2 alpha TV(u)``, i.e. ``g - pi_{alpha K}(g)``."""
    g = as_signal(g)
    w, info = constrained_prox(g, np.ones(g.shape, dtype=bool), alpha, cfg, p0)
    return (w, info) if full_output else w
