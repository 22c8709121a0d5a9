import numpy as np
import pytest
from hypothesis import given, settings, strategies as st

from tvdd.grid import GridShape, as_signal, divergence, energy, gradient, total_variation
from tvdd.operators import identity

shapes = st.lists(st.integers(1, 6), min_size=1, max_size=3).map(tuple)


@settings(max_examples=60, deadline=None)
@given(shapes, st.integers(0, 2**31))
def test_divergence_is_negative_adjoint(shape, seed):
    rng = np.random.default_rng(seed)
    u = rng.standard_normal(shape)
    p = rng.standard_normal((len(shape),) + shape)
    lhs = np.vdot(gradient(u), p) + np.vdot(u, divergence(p))
    assert abs(lhs) <= 1e-12 * max(1.0, np.linalg.norm(u) * np.linalg.norm(p))


def test_gradient_vanishes_on_last_slice():
    u = np.arange(12.0).reshape(3, 4) ** 2
    p = gradient(u)
    assert np.all(p[0, -1, :] == 0) and np.all(p[1, :, -1] == 0)
    assert np.allclose(p[0, :-1], np.diff(u, axis=0))


def test_gradient_of_constant_is_zero():
    assert np.all(gradient(np.full((4, 5, 2), 3.5)) == 0)


def test_divergence_formula_1d():
    p = np.array([[1.0, 2.0, 4.0, 99.0]])
    assert np.allclose(divergence(p), [1.0, 1.0, 2.0, -4.0])


def test_total_variation_examples():
    assert total_variation(np.array([0.0, 1.0, 1.0, 3.0])) == pytest.approx(3.0)
    u = np.zeros((2, 2))
    u[0, 0] = 1.0
    # only the corner has a nonzero gradient (-1, -1)
    assert total_variation(u) == pytest.approx(np.sqrt(2.0))


def test_energy_of_exact_data():
    T = identity((2,))
    assert energy(np.array([0.0, 1.0]), T, np.array([0.0, 1.0]), 0.2) == pytest.approx(0.4)


def test_energy_validation():
    T = identity((3,))
    with pytest.raises(ValueError):
        energy(np.zeros(3), T, np.zeros(3), 0.0)
    with pytest.raises(ValueError):
        energy(np.zeros(3), T, np.zeros(4), 1.0)


def test_grid_shape():
    s = GridShape([4, 5])
    assert s.d == 2 and s.size == 20 and s.dims == (4, 5)
    assert GridShape.of(np.zeros((2, 3, 4))).dims == (2, 3, 4)
    with pytest.raises(ValueError):
        GridShape((0, 3))


def test_divergence_rejects_mismatched_field():
    with pytest.raises(ValueError):
        divergence(np.zeros((2, 5)))


def test_as_signal_rejects_bad_input():
    with pytest.raises(ValueError):
        as_signal(np.array([1.0, np.nan]))
    with pytest.raises(ValueError):
        as_signal(3.0)
