import numpy as np
import pytest
from hypothesis import given, settings, strategies as st

from tvdd.grid import divergence, total_variation
from tvdd.oracles import taut_string_1d
from tvdd.prox import ProjectionConfig, constrained_prox, error_bound, project_onto_alphaK, tv_denoise

TIGHT = ProjectionConfig(max_iters=200000, tol=1e-12)


def closed_form_pair(g, alpha):
    t = np.clip((g[0] - g[1]) / 2, -alpha, alpha)
    return np.array([t, -t])


def test_projection_example():
    assert np.allclose(project_onto_alphaK([0.0, 1.0], 0.2, TIGHT), [-0.2, 0.2], atol=1e-9)


def test_projection_inside_set_is_identity():
    g = np.array([0.3, -0.3])
    assert np.allclose(project_onto_alphaK(g, 0.5, TIGHT), g, atol=1e-9)


@pytest.mark.parametrize("g,alpha,want", [((0.0, 1.0), 0.2, (0.2, 0.8)), ((0.0, 1.0), 0.6, (0.5, 0.5))])
def test_denoise_pair_examples(g, alpha, want):
    assert np.allclose(tv_denoise(np.array(g), alpha, TIGHT), want, atol=1e-9)


def test_constant_input_is_fixed():
    g = np.full((5, 4), 2.5)
    assert np.allclose(tv_denoise(g, 0.7), g)
    assert np.allclose(project_onto_alphaK(g, 0.7), 0.0)


@settings(max_examples=30, deadline=None)
@given(st.integers(0, 2**31))
def test_pair_matches_closed_form(seed):
    rng = np.random.default_rng(seed)
    g, alpha = rng.normal(size=2) * 2, rng.uniform(0.01, 2)
    assert np.allclose(project_onto_alphaK(g, alpha, TIGHT), closed_form_pair(g, alpha), atol=1e-8)


@pytest.mark.parametrize("shape", [(9,), (5, 6), (3, 3, 4)])
def test_projection_variational_inequality(shape, rng):
    g = rng.standard_normal(shape)
    alpha = 0.3
    pi = project_onto_alphaK(g, alpha, ProjectionConfig(max_iters=100000, tol=1e-10))
    for _ in range(50):
        q = rng.standard_normal((len(shape),) + shape)
        q /= np.maximum(1.0, np.sqrt(np.sum(q * q, axis=0)))
        q = alpha * divergence(q)
        assert np.vdot(g - pi, q - pi) <= 1e-6 * np.linalg.norm(g)


def test_denoise_reduces_objective_and_is_idempotent_in_energy(rng):
    g = rng.standard_normal((8, 8))
    alpha = 0.2

    def obj(u, f):
        return np.sum((u - f) ** 2) + 2 * alpha * total_variation(u)

    u = tv_denoise(g, alpha, ProjectionConfig(max_iters=50000, tol=1e-10))
    assert obj(u, g) <= obj(g, g)
    v = tv_denoise(u, alpha, ProjectionConfig(max_iters=50000, tol=1e-10))
    assert total_variation(v) <= total_variation(u) + 1e-9


def test_nonconvergence_is_reported_not_raised(rng):
    g = rng.standard_normal(30)
    u, info = tv_denoise(g, 0.5, ProjectionConfig(max_iters=3, tol=0.0), full_output=True)
    assert not info.converged and info.iterations == 3 and np.all(np.isfinite(u))


def test_warm_start_reuses_dual(rng):
    g = rng.standard_normal((10, 10))
    cfg = ProjectionConfig(max_iters=100000, tol=1e-9)
    _, cold = tv_denoise(g, 0.3, cfg, full_output=True)
    p = cold.dual.copy()
    _, warm = tv_denoise(g, 0.3, cfg, p0=p, full_output=True)
    assert warm.iterations < cold.iterations


def test_pinned_points_keep_their_values(rng):
    f = rng.standard_normal(12)
    free = np.ones(12, bool)
    free[[0, 5, 11]] = False
    w, _ = constrained_prox(f, free, 0.4)
    assert np.array_equal(w[~free], f[~free])


def test_config_validation():
    with pytest.raises(ValueError):
        ProjectionConfig(tau=0.0)
    with pytest.raises(ValueError):
        ProjectionConfig(max_iters=0)
    with pytest.raises(ValueError):
        ProjectionConfig(tol=-1)
    assert ProjectionConfig().step(2) == pytest.approx(0.125)
    with pytest.raises(ValueError):
        ProjectionConfig(tau=0.3).step(1)
    with pytest.raises(ValueError):
        tv_denoise(np.zeros(3), 0.0)


def test_error_bound_is_valid_and_met(rng):
    for _ in range(20):
        g = rng.standard_normal(int(rng.integers(5, 40)))
        alpha = rng.uniform(0.05, 1.0)
        exact = taut_string_1d(g, alpha)
        for target in (1e-3, 1e-6):
            cfg = ProjectionConfig(max_iters=200000, tol=1e-2, error_tol=target)
            w, info = tv_denoise(g, alpha, cfg, full_output=True)
            assert np.linalg.norm(w - exact) <= info.error_bound + 1e-12
            assert info.converged and info.error_bound <= target


def test_error_bound_vanishes_at_solution():
    g = np.array([0.0, 0.0, 1.0, 1.0, 0.2])
    w, info = tv_denoise(g, 0.1, ProjectionConfig(max_iters=100000, tol=1e-14), full_output=True)
    bound, _, gap = error_bound(w, info.dual, 0.1)
    assert 0 <= gap <= 1e-12 and bound <= 1e-6


def test_tightened_config():
    cfg = ProjectionConfig(max_iters=10, tol=1e-4, error_tol=1e-3).tightened(0.01)
    assert (cfg.max_iters, cfg.tol, cfg.error_tol) == (20, pytest.approx(1e-6), pytest.approx(1e-5))
    assert ProjectionConfig(tol=1e-4).tightened(0.5).error_tol is None
    with pytest.raises(ValueError):
        ProjectionConfig(error_tol=0.0)
