"""Driver generators: determinism, exact deterministic kinds, jump placement."""

import numpy as np
import pytest

from roughreflect import GeneratorSpec, TimeGrid, generate


def _spec(kind, nodes=9, dimension=1, seed=0, **parameters):
    grid = TimeGrid.uniform(0.0, 1.0, nodes)
    return GeneratorSpec(
        kind=kind, grid=grid, dimension=dimension, seed=seed, parameters=parameters
    )


def test_zero_polynomial_is_zero_path():
    path = generate(_spec("polynomial", coefficients=[0.0, 0.0]))
    assert np.array_equal(path.values, np.zeros((9, 1)))


def test_linear_polynomial_samples_exactly():
    path = generate(_spec("polynomial", nodes=5, coefficients=[0.0, -1.0]))
    assert np.array_equal(path.values.ravel(), -path.grid.times)


def test_staircase_unit_jump():
    path = generate(_spec("staircase", nodes=5, times=[0.5], sizes=[1.0]))
    assert np.array_equal(path.values.ravel(), [0.0, 0.0, 1.0, 1.0, 1.0])


def test_staircase_rejects_off_grid_jump():
    with pytest.raises(ValueError):
        generate(_spec("staircase", nodes=5, times=[0.3], sizes=[1.0]))


def test_smooth_sine_exact_samples():
    path = generate(_spec("smooth_sine", nodes=7, amplitude=2.0, frequency=1.5))
    expected = 2.0 * np.sin(2.0 * np.pi * 1.5 * path.grid.times)
    assert np.array_equal(path.values.ravel(), expected)


def test_brownian_seed_determinism():
    spec = _spec("brownian", nodes=8, dimension=2, seed=123)
    first = generate(spec)
    second = generate(spec)
    assert np.array_equal(first.values, second.values)
    assert first.values[0].tolist() == [0.0, 0.0]


def test_different_seeds_differ():
    a = generate(_spec("brownian", seed=1))
    b = generate(_spec("brownian", seed=2))
    assert not np.array_equal(a.values, b.values)


def test_brownian_rejects_negative_volatility():
    with pytest.raises(ValueError):
        generate(_spec("brownian", volatility=-1.0))


def test_compound_poisson_rejects_negative_rate():
    with pytest.raises(ValueError):
        generate(_spec("compound_poisson", rate=-2.0))


def test_compound_poisson_zero_rate_is_flat():
    path = generate(_spec("compound_poisson", rate=0.0))
    assert np.array_equal(path.values, np.zeros((9, 1)))


def test_compound_poisson_jump_sizes_within_bounds():
    path = generate(
        _spec(
            "compound_poisson", nodes=33, seed=5,
            rate=20.0, jump_min=0.5, jump_max=1.0,
        )
    )
    steps = np.diff(path.values, axis=0)
    jumps = steps[np.abs(steps).max(axis=1) > 0]
    assert len(jumps) > 0
    # each node may absorb several arrivals, so sizes are sums in [0.5, 1] each
    assert np.all(jumps > 0.5 - 1e-12)


def test_unknown_kind_rejected():
    with pytest.raises(ValueError):
        _spec("gamma")


def test_brownian_quadratic_variation_matches_volatility():
    vol = 0.8
    nodes = 257
    ensemble = 64
    qvs = []
    for seed in range(ensemble):
        path = generate(_spec("brownian", nodes=nodes, seed=seed, volatility=vol))
        qvs.append(float(np.sum(np.diff(path.values, axis=0) ** 2)))
    mean = np.mean(qvs)
    # QV of one path has sd = vol^2 sqrt(2/(nodes-1)); the ensemble mean shrinks it
    standard_error = vol**2 * np.sqrt(2.0 / (nodes - 1)) / np.sqrt(ensemble)
    assert abs(mean - vol**2) <= 3.0 * standard_error
