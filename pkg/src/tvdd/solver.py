"""Subspace-correction solvers for ``min_u ||T u - g||^2 + 2 alpha TV(u)``.

Each subdomain update minimizes the surrogate functional

    J_j^s(u_j + u_other, a) = J(u_j + u_other) + ||u_j - a||^2 - ||T (u_j - a)||^2

over signals ``u_j`` supported in subdomain ``j`` (and vanishing on its
internal boundary when subdomains overlap). Completing the square turns
this into a TV proximity problem whose values are pinned off the free set;
the pinned values are enforced through a Lagrange multiplier ``eta``.

Two ways of obtaining the multiplier are provided:

``"dual"``
    A dual projection iteration run directly with the pinned values held
    fixed (on a crop around the free set). The multiplier is implicit in
    the converged dual field.
``"fixed_point"``
    The explicit iteration ``eta <- eta + restrict_C(prox(f - eta) - u_other)``
    around the unconstrained projection onto alpha K.

Both converge to the same minimizer; ``"dual"`` is the default because it
needs a single projection per step.
"""

from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass, field, replace
import csv
import logging
import math
import os

import numpy as np

from .decomposition import project_onto_subspace
from .grid import energy
from .operators import DegenerateProblemError, check_kernel_condition, estimate_norm
from .prox import ProjectionConfig, constrained_prox, tv_denoise

log = logging.getLogger(__name__)


@dataclass
class SolverConfig:
    """Iteration counts and tolerances shared by the three algorithms.

    ``L`` inner steps are taken on odd-numbered subdomains (1, 3, ...) and
    ``M`` on even-numbered ones. The projection tolerance starts at
    ``projection.tol`` and shrinks by ``projection_tol_decay`` per outer
    iteration down to ``projection_tol_floor``. Each projection must also
    certify a primal error below ``inner_accuracy`` times the previous
    outer increment (same floor), so inexactness never dominates the
    progress being measured. ``descent_slack`` is the
    energy increase a whole sweep may incur through inexact projections;
    a subdomain step exceeding its share is redone with a tighter
    projection.
    """

    L: int = 1
    M: int = 1
    outer_iters: int = 500
    outer_tol: float = 1e-6
    multiplier_iters: int = 500
    multiplier_tol: float = 1e-9
    multiplier_method: str = "dual"
    projection: ProjectionConfig = field(
        default_factory=lambda: ProjectionConfig(max_iters=20000, tol=1e-4)
    )
    projection_tol_floor: float = 1e-7
    projection_tol_decay: float = 0.8
    inner_accuracy: float = 0.1
    refine_attempts: int = 2
    descent_slack: float = 5e-11
    use_partition_correction: bool = True
    threads: int = None

    def __post_init__(self):
        if self.L < 1 or self.M < 1 or self.outer_iters < 1:
            raise ValueError("L, M and outer_iters must be at least 1")
        if self.multiplier_method not in ("dual", "fixed_point"):
            raise ValueError(f"unknown multiplier method {self.multiplier_method!r}")

    def inner_steps(self, j):
        return self.L if j % 2 == 0 else self.M

    def projection_at(self, n, last_increment=None):
        tol = max(self.projection.tol * self.projection_tol_decay**n, self.projection_tol_floor)
        tol = min(tol, self.projection.tol)
        err = tol if last_increment is None else self.inner_accuracy * last_increment
        err = max(err, self.projection_tol_floor)
        return replace(self.projection, tol=tol, error_tol=err)


@dataclass
class SolverState:
    u: np.ndarray
    components: list
    energy_trace: list = field(default_factory=list)  # (n, energy, increment)
    diagnostics: list = field(default_factory=list)
    converged: bool = False

    @property
    def energies(self):
        return np.array([e for _, e, _ in self.energy_trace])

    @property
    def increments(self):
        return np.array([d for _, _, d in self.energy_trace[1:]])

    @property
    def max_component_norms(self):
        return np.array([d["max_component_norm"] for d in self.diagnostics])

    def write_trace(self, path):
        with open(path, "w", newline="") as fh:
            w = csv.writer(fh, lineterminator="\n")
            w.writerow(
                ["iter", "energy", "increment_norm", "max_component_norm", "projection_residual"]
            )
            for (n, e, inc), d in zip(self.energy_trace, self.diagnostics):
                w.writerow(
                    [n, repr(float(e)), repr(float(inc)), repr(float(d["max_component_norm"])),
                     repr(float(d["projection_residual"]))]
                )


@dataclass
class InnerInfo:
    accepted: bool = True
    attempts: int = 1
    projection_residual: float = 0.0
    projection_iters: int = 0
    multiplier_residual: float = 0.0
    multiplier_iters: int = 0
    step: float = 1.0


def surrogate_energy(u_j, u_other, a, T, g, alpha):
    """``J(u_j + u_other) + ||u_j - a||^2 - ||T (u_j - a)||^2``."""
    d = u_j - a
    Td = T.apply(d)
    return energy(u_j + u_other, T, g, alpha) + float(np.vdot(d, d)) - float(np.dot(Td, Td))


def _crop(free):
    """Bounding box of ``free`` grown by one line on every side."""
    idx = np.nonzero(free)
    return tuple(
        slice(max(int(i.min()) - 1, 0), min(int(i.max()) + 2, n))
        for i, n in zip(idx, free.shape)
    )


def _pinned_solve(f, u_other, free, alpha, pcfg, cache, key):
    box = _crop(free)
    fc = np.where(free[box], f[box], u_other[box])
    p = cache.get(key) if cache is not None else None
    if p is not None and p.shape[1:] != fc.shape:
        p = None
    w, info = constrained_prox(fc, free[box], alpha, pcfg, p)
    if cache is not None:
        cache[key] = info.dual
    out = np.zeros_like(f)
    out[box] = np.where(free[box], w - u_other[box], 0.0)
    return out, info, 0.0, 0


def _fixed_point_solve(f, u_other, free, alpha, pcfg, cfg, cache, key):
    pinned = ~free
    eta = np.zeros_like(f)
    p = cache.get(key) if cache is not None else None
    res = math.inf
    m = 0
    for m in range(1, cfg.multiplier_iters + 1):
        w, info = tv_denoise(f - eta, alpha, pcfg, p0=p, full_output=True)
        p = info.dual
        r = np.where(pinned, w - u_other, 0.0)
        res = float(np.max(np.abs(r)))
        if res <= cfg.multiplier_tol:
            break
        eta += r
    if cache is not None:
        cache[key] = p
    return np.where(free, w - u_other, 0.0), info, res, m


def _inner_step(u_prev, u_other, j, dec, T, g, alpha, cfg, pcfg, cache=None):
    free = dec.free(j)
    if not free.any():
        return np.zeros_like(u_prev), InnerInfo()
    r = g - T.apply(u_other + u_prev)
    z = u_prev + project_onto_subspace(T.adjoint(r), j, dec)
    f = z + u_other
    limit = energy(u_prev + u_other, T, g, alpha) + cfg.descent_slack / dec.J
    info = InnerInfo(accepted=False, attempts=0)
    for attempt in range(cfg.refine_attempts + 1):
        if cfg.multiplier_method == "dual":
            cand, pinfo, mres, mit = _pinned_solve(f, u_other, free, alpha, pcfg, cache, ("dual", j))
        else:
            cand, pinfo, mres, mit = _fixed_point_solve(
                f, u_other, free, alpha, pcfg, cfg, cache, ("fp", j)
            )
        info.attempts = attempt + 1
        info.projection_residual = pinfo.residual
        info.projection_iters += pinfo.iterations
        info.multiplier_residual = mres
        info.multiplier_iters = mit
        # the surrogate is strongly convex in u_j, so short steps towards an
        # approximate minimizer still descend when the full step does not
        for theta in (1.0, 0.5, 0.25, 0.125):
            trial = cand if theta == 1.0 else u_prev + theta * (cand - u_prev)
            if surrogate_energy(trial, u_other, u_prev, T, g, alpha) <= limit:
                info.accepted = True
                info.step = theta
                return trial, info
        pcfg = pcfg.tightened(1e-2)
    log.debug("subdomain %d: no descent after %d attempts, keeping previous iterate", j, info.attempts)
    return u_prev.copy(), info


def surrogate_inner_step(u_j_prev, u_other, j, dec, T, g, alpha, cfg=None, *, full_output=False):
    """One surrogate minimization on subdomain ``j``.

    Returns the minimizer of ``J_j^s(u_j + u_other, u_j_prev)`` over signals
    supported in subdomain ``j`` that vanish on its internal boundary. The
    result is exactly zero off the free set, and its surrogate value never
    exceeds that of ``u_j_prev``; if the inexact projection cannot achieve
    this, ``u_j_prev`` is returned and ``info.accepted`` is False.
    """
    cfg = cfg or SolverConfig()
    g = np.asarray(g, dtype=np.float64)
    u_j_prev = np.asarray(u_j_prev, dtype=np.float64)
    u_other = np.asarray(u_other, dtype=np.float64)
    pcfg = cfg.projection_at(math.inf)
    out, info = _inner_step(u_j_prev, u_other, j, dec, T, g, alpha, cfg, pcfg)
    return (out, info) if full_output else out


def _check_problem(T, g, alpha, dec):
    if alpha <= 0:
        raise ValueError("alpha must be positive")
    if T.shape != dec.shape.dims:
        raise ValueError("operator domain and decomposition disagree on the grid")
    if np.shape(g) != (T.range_dim,):
        raise ValueError("data length does not match the operator range")
    if not check_kernel_condition(T):
        raise DegenerateProblemError("constant signals lie in the kernel of T")
    if estimate_norm(T, 30) >= 1.0:
        raise ValueError("operator norm must be below 1; call normalize_problem first")


def _last_increment(state):
    return state.energy_trace[-1][2] if len(state.energy_trace) > 1 else None


def _record(state, n, u, u_prev, T, g, alpha, comps, infos):
    inc = 0.0 if u_prev is None else float(np.linalg.norm(u - u_prev))
    state.energy_trace.append((n, energy(u, T, g, alpha), inc))
    norms = [float(np.linalg.norm(c)) for c in comps]
    state.diagnostics.append(
        {
            "component_norms": norms,
            "max_component_norm": max(norms),
            "projection_residual": max((i.projection_residual for i in infos), default=0.0),
            "multiplier_residual": max((i.multiplier_residual for i in infos), default=0.0),
            "projection_iters": sum(i.projection_iters for i in infos),
            "rejected": sum(not i.accepted for i in infos),
        }
    )
    return inc


def _thread_count(cfg, J):
    n = cfg.threads
    if n is None:
        n = int(os.environ.get("TVDD_THREADS", "0") or 0)
    if n <= 0:
        n = os.cpu_count() or 1
    return max(1, min(n, J))


def _start(dec, u0):
    shape = dec.shape.dims
    u = np.zeros(shape) if u0 is None else np.array(u0, dtype=np.float64)
    if u.shape != shape:
        raise ValueError("initial guess has the wrong shape")
    return u


def solve_sequential_nonoverlapping(T, g, alpha, dec, cfg=None, *, u0=None, callback=None):
    """Gauss-Seidel sweep over disjoint subdomains.

    Subdomain ``j`` takes its inner steps against the freshest components of
    all other subdomains; ``u`` is their sum.
    """
    if dec.overlapping:
        raise ValueError("decomposition overlaps; use solve_sequential_overlapping")
    cfg = cfg or SolverConfig()
    g = np.asarray(g, dtype=np.float64)
    _check_problem(T, g, alpha, dec)
    u = _start(dec, u0)
    comps = [project_onto_subspace(u, j, dec) for j in range(dec.J)]
    state = SolverState(u, comps)
    _record(state, 0, u, None, T, g, alpha, comps, [])
    cache = {}
    for n in range(1, cfg.outer_iters + 1):
        pcfg = cfg.projection_at(n - 1, _last_increment(state))
        u_prev = u
        infos = []
        for j in range(dec.J):
            other = sum(c for k, c in enumerate(comps) if k != j)
            for _ in range(cfg.inner_steps(j)):
                comps[j], info = _inner_step(comps[j], other, j, dec, T, g, alpha, cfg, pcfg, cache)
                infos.append(info)
        u = sum(comps)
        inc = _record(state, n, u, u_prev, T, g, alpha, comps, infos)
        if callback is not None:
            callback(n, u)
        if inc < cfg.outer_tol:
            state.converged = True
            break
    state.u, state.components = u, comps
    return state


def solve_parallel_nonoverlapping(T, g, alpha, dec, cfg=None, *, u0=None, callback=None):
    """Jacobi sweep over disjoint subdomains with averaging.

    All subdomains start from the frozen iterate ``u^(n)``; the new iterate
    is ``(sum_j u_j^new + (J - 1) u^(n)) / J``. Subdomain solves run on up to
    ``TVDD_THREADS`` threads.
    """
    if dec.overlapping:
        raise ValueError("decomposition overlaps; the parallel solver needs disjoint subdomains")
    cfg = cfg or SolverConfig()
    g = np.asarray(g, dtype=np.float64)
    _check_problem(T, g, alpha, dec)
    u = _start(dec, u0)
    J = dec.J
    comps = [project_onto_subspace(u, j, dec) for j in range(J)]
    state = SolverState(u, comps)
    _record(state, 0, u, None, T, g, alpha, comps, [])
    caches = [{} for _ in range(J)]
    nthreads = _thread_count(cfg, J)
    pool = ThreadPoolExecutor(nthreads) if nthreads > 1 else None

    def local(j, u_frozen, comps_frozen, pcfg):
        cj = comps_frozen[j]
        other = u_frozen - cj
        infos = []
        for _ in range(cfg.inner_steps(j)):
            cj, info = _inner_step(cj, other, j, dec, T, g, alpha, cfg, pcfg, caches[j])
            infos.append(info)
        return cj, infos

    try:
        for n in range(1, cfg.outer_iters + 1):
            pcfg = cfg.projection_at(n - 1, _last_increment(state))
            u_prev = u
            if pool is None:
                results = [local(j, u, comps, pcfg) for j in range(J)]
            else:
                results = list(pool.map(lambda j: local(j, u_prev, comps, pcfg), range(J)))
            new = [r[0] for r in results]
            infos = [i for r in results for i in r[1]]
            u = (sum(new) + (J - 1) * u_prev) / J
            comps = [project_onto_subspace(u, j, dec) for j in range(J)]
            inc = _record(state, n, u, u_prev, T, g, alpha, comps, infos)
            if callback is not None:
                callback(n, u)
            if inc < cfg.outer_tol:
                state.converged = True
                break
    finally:
        if pool is not None:
            pool.shutdown()
    state.u, state.components = u, comps
    return state


def solve_sequential_overlapping(T, g, alpha, dec, cfg=None, *, u0=None, callback=None):
    """Round-robin sweep over overlapping subdomains.

    Local updates vanish on the internal boundaries. After every sweep the
    iterate is re-split with the partition of unity, ``u_j = chi_j u``,
    unless ``cfg.use_partition_correction`` is False, in which case each
    subdomain keeps its own last local solution.
    """
    if not dec.overlapping:
        raise ValueError("decomposition does not overlap")
    cfg = cfg or SolverConfig()
    g = np.asarray(g, dtype=np.float64)
    _check_problem(T, g, alpha, dec)
    u = _start(dec, u0)
    comps = [dec.weights[j] * u for j in range(dec.J)]
    state = SolverState(u, comps)
    _record(state, 0, u, None, T, g, alpha, comps, [])
    cache = {}
    for n in range(1, cfg.outer_iters + 1):
        pcfg = cfg.projection_at(n - 1, _last_increment(state))
        u_prev = u
        infos = []
        for j in range(dec.J):
            other = sum(c for k, c in enumerate(comps) if k != j)
            for _ in range(cfg.inner_steps(j)):
                comps[j], info = _inner_step(comps[j], other, j, dec, T, g, alpha, cfg, pcfg, cache)
                infos.append(info)
        u = sum(comps)
        inc = _record(state, n, u, u_prev, T, g, alpha, comps, infos)
        if cfg.use_partition_correction:
            comps = [dec.weights[j] * u for j in range(dec.J)]
        state.diagnostics[-1]["max_split_norm"] = max(float(np.linalg.norm(c)) for c in comps)
        if callback is not None:
            callback(n, u)
        if inc < cfg.outer_tol:
            state.converged = True
            break
    state.u, state.components = u, comps
    return state


ALGORITHMS = {
    "sequential": solve_sequential_nonoverlapping,
    "parallel": solve_parallel_nonoverlapping,
    "overlapping": solve_sequential_overlapping,
}
