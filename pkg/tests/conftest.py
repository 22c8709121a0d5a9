import numpy as np
import pytest

from tvdd.operators import MaskOperator, PartialFourierOperator, fourier_sampling_mask, normalize_problem

ACCEPTANCE_LINES = []


def pytest_terminal_summary(terminalreporter):
    if ACCEPTANCE_LINES:
        terminalreporter.section("acceptance criteria")
        for line in sorted(ACCEPTANCE_LINES, key=lambda s: int(s.split()[1].rstrip(":"))):
            terminalreporter.write_line(line)


def dense(T):
    """Matrix of a measurement operator, built column by column."""
    n = int(np.prod(T.shape))
    cols = []
    for i in range(n):
        e = np.zeros(n)
        e[i] = 1.0
        cols.append(T.apply(e.reshape(T.shape)))
    return np.array(cols).T


def difference_matrices(shape):
    """Forward differences per axis, zero rows on the last slice.

    Written from index arithmetic alone so the reference solver shares no
    code with the package.
    """
    n = int(np.prod(shape))
    strides = [int(np.prod(shape[k + 1 :])) for k in range(len(shape))]
    mats = []
    for k, nk in enumerate(shape):
        D = np.zeros((n, n))
        for i, idx in enumerate(np.ndindex(*shape)):
            if idx[k] < nk - 1:
                D[i, i] = -1.0
                D[i, i + strides[k]] = 1.0
        mats.append(D)
    return mats


def cvx_solve(shape, alpha, *, quad=None, lin=None, Tmat=None, g=None, pinned=None, pinned_values=None):
    """Minimize ``x' quad x + lin' x + ||Tmat x - g||^2 + 2 alpha TV(x)`` with cvxpy.

    ``quad`` is a (center, weight) pair meaning ``weight * ||x - center||^2``.
    Points in ``pinned`` are fixed to ``pinned_values``.
    """
    import cvxpy as cp

    n = int(np.prod(shape))
    x = cp.Variable(n)
    Ds = difference_matrices(shape)
    tv = cp.sum(cp.norm(cp.vstack([D @ x for D in Ds]), 2, axis=0))
    obj = 2 * alpha * tv
    if quad is not None:
        c, w = quad
        obj = obj + w * cp.sum_squares(x - np.ravel(c))
    if lin is not None:
        obj = obj + np.ravel(lin) @ x
    if Tmat is not None:
        obj = obj + cp.sum_squares(Tmat @ x - g)
    cons = []
    if pinned is not None and np.any(pinned):
        idx = np.flatnonzero(np.ravel(pinned))
        cons.append(x[idx] == np.ravel(pinned_values)[idx])
    prob = cp.Problem(cp.Minimize(obj), cons)
    prob.solve(solver=cp.CLARABEL, tol_gap_abs=1e-12, tol_gap_rel=1e-12, tol_feas=1e-12)
    return np.asarray(x.value).reshape(shape)


def piecewise_signal(rng, shape, pieces=3):
    """Random piecewise-constant signal plus a little noise."""
    u = np.zeros(shape)
    for _ in range(pieces):
        lo = [rng.integers(0, n) for n in shape]
        hi = [rng.integers(l + 1, n + 1) for l, n in zip(lo, shape)]
        u[tuple(slice(a, b) for a, b in zip(lo, hi))] += rng.uniform(-1, 1)
    return u + 0.05 * rng.standard_normal(shape)


def random_problem(rng, shape, kind="mask", rel_alpha=None):
    """Normalized ``(T, g, alpha, truth)`` for a random instance."""
    truth = piecewise_signal(rng, shape)
    if kind == "mask":
        mask = rng.random(shape) < 0.7
        mask.flat[rng.integers(mask.size)] = True
        T0 = MaskOperator(shape, mask)
    else:
        seed = int(rng.integers(1 << 30))
        T0 = PartialFourierOperator(shape, fourier_sampling_mask(shape, 0.5, 2, seed))
    g0 = T0.apply(truth)
    rel_alpha = rng.uniform(0.02, 0.1) if rel_alpha is None else rel_alpha
    span = float(truth.max() - truth.min()) or 1.0
    T, g, alpha = normalize_problem(T0, g0, rel_alpha * span)
    return T, g, alpha, truth


@pytest.fixture
def rng():
    return np.random.default_rng(12345)
