import itertools

import numpy as np
import pytest
from hypothesis import given, settings, strategies as st

from tvdd.grid import energy
from tvdd.operators import MaskOperator, identity, normalize_problem
from tvdd.oracles import check_optimality, oracle_minimize, taut_string_1d


def enumerate_minimizer(g, alpha):
    """Exact 1D TV denoising by enumerating segmentations and jump signs.

    For a fixed segmentation with fixed signs of the jumps the objective is
    quadratic and each level has a closed form; the best candidate over all
    segmentations and sign patterns is the global minimizer.
    """
    n = len(g)

    def obj(u):
        return np.sum((u - g) ** 2) + 2 * alpha * np.sum(np.abs(np.diff(u)))

    best, best_u = np.inf, None
    for cuts in itertools.product([0, 1], repeat=n - 1):
        edges = [0] + [i + 1 for i, c in enumerate(cuts) if c] + [n]
        segs = list(zip(edges[:-1], edges[1:]))
        for signs in itertools.product([-1, 1], repeat=len(segs) - 1):
            s = (0,) + signs + (0,)
            u = np.empty(n)
            for k, (a, b) in enumerate(segs):
                u[a:b] = g[a:b].mean() - alpha * (s[k] - s[k + 1]) / (b - a)
            v = obj(u)
            if v < best:
                best, best_u = v, u
    return best_u


def test_taut_string_examples():
    assert np.allclose(taut_string_1d(np.array([0.0, 1.0]), 0.2), [0.2, 0.8])
    g = np.full(9, -1.5)
    assert np.allclose(taut_string_1d(g, 0.4), g)


@settings(max_examples=100, deadline=None)
@given(st.integers(0, 2**31))
def test_taut_string_matches_enumeration(seed):
    rng = np.random.default_rng(seed)
    g = rng.normal(size=4) * 2
    alpha = rng.uniform(0.01, 1.5)
    assert np.allclose(taut_string_1d(g, alpha), enumerate_minimizer(g, alpha), atol=1e-9)


def test_oracle_matches_taut_string(rng):
    g0 = np.repeat(rng.normal(size=5), 6) + 0.1 * rng.normal(size=30)
    T, g, a = normalize_problem(identity((30,)), g0, 0.3)
    u = oracle_minimize(T, g, a, max_iters=5000, tol=1e-12)
    # with T = c I the problem is denoising of g / c at weight a / c^2
    c = T.scale
    assert np.max(np.abs(u - taut_string_1d(g / c, a / c**2))) <= 1e-6


def test_oracle_full_merge():
    # a jump of 0.2 against alpha = 0.5 merges into the mean
    T, g, a = normalize_problem(identity((6,)), np.array([0.0, 0.0, 0.0, 0.2, 0.2, 0.2]), 0.5)
    u = oracle_minimize(T, g, a, max_iters=5000, tol=1e-12)
    assert np.allclose(u, 0.1, atol=1e-6)


def test_oracle_zero_data():
    T = MaskOperator((5, 5), scale=0.9)
    assert np.all(oracle_minimize(T, np.zeros(25), 0.1) == 0)


def test_check_optimality_examples():
    T = identity((2,), scale=0.9)
    g = 0.9 * np.array([0.0, 1.0])
    a = 0.81 * 0.2
    exact = np.array([0.2, 0.8])
    assert check_optimality(exact, T, g, a) <= 1e-6
    assert check_optimality(np.zeros(2), T, g, a) > 0.1 * np.linalg.norm(g)


def test_check_optimality_of_oracle_output(rng):
    mask = rng.random((8, 8)) > 0.3
    img = np.zeros((8, 8))
    img[2:6, 3:7] = 1.0
    T, g, a = normalize_problem(MaskOperator(img.shape, mask), img[mask], 0.05)
    u = oracle_minimize(T, g, a, max_iters=5000, tol=1e-10)
    assert check_optimality(u, T, g, a) <= 1e-3
    assert energy(u, T, g, a) <= energy(img, T, g, a)
