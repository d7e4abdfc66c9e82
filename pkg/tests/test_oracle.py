import warnings

import numpy as np
import pytest
from hypothesis import given, strategies as st
from hypothesis.extra.numpy import arrays

from sifirank import derive_balance_sheets, generate_ba, generate_complete
from sifirank.errors import DataError, NumericalError
from sifirank.model import ImpactModel, compare_methods
from sifirank.oracle import (averaged_power_method, dominant_eigenvector, project_to_simplex,
                             relative_error, solve_optimal)
from oracles import grid_min_residual, perron_vector, simplex_grid

vectors = st.integers(1, 6).flatmap(
    lambda n: arrays(float, n, elements=st.floats(-50, 50, allow_nan=False)))


def test_projection_examples():
    p = project_to_simplex([0.5, 0.5, 2.0])
    assert np.allclose(p, [0, 0, 1])
    pts = np.array(list(simplex_grid(3, 1000)))
    best = pts[np.argmin(np.linalg.norm(pts - [0.5, 0.5, 2.0], axis=1))]
    assert np.allclose(best, p, atol=1e-3)
    v = np.array([0.2, 0.3, 0.5])
    assert np.array_equal(project_to_simplex(v), v)
    for c in (-7.0, 0.0, 3.5):
        assert np.allclose(project_to_simplex([c, c, c]), 1 / 3)


def test_projection_rejects_non_finite():
    with pytest.raises(DataError):
        project_to_simplex([1.0, np.inf])
    with pytest.raises(DataError):
        project_to_simplex([])


@given(vectors)
def test_projection_lands_on_simplex_and_is_idempotent(v):
    p = project_to_simplex(v)
    assert np.all(p >= 0) and abs(p.sum() - 1) < 1e-12
    assert np.array_equal(project_to_simplex(p), p)


@given(vectors, st.integers(0, 2**32 - 1))
def test_projection_is_nearest_point(v, seed):
    p = project_to_simplex(v)
    s = np.random.default_rng(seed).dirichlet(np.ones(len(v)), 1000)
    assert np.all(np.linalg.norm(v - p) <= np.linalg.norm(v - s, axis=1) + 1e-12)


def test_solve_optimal_identity_and_swap():
    assert solve_optimal(np.eye(4)).objective < 1e-10
    res = solve_optimal(np.array([[0.0, 1.0], [1.0, 0.0]]))
    assert np.allclose(res.p, [0.5, 0.5]) and res.objective < 1e-12


@pytest.mark.parametrize("seed", range(3))
def test_solve_optimal_against_grid(seed):
    rng = np.random.default_rng(seed)
    M = rng.uniform(0.1, 1, (5, 5))
    M /= M.sum(axis=0)  # column-stochastic: a zero-residual point exists
    res = solve_optimal(M)
    grid, _ = grid_min_residual(M, steps=40)
    assert res.converged and res.objective <= grid + 1e-6
    assert res.objective < 1e-8


@pytest.mark.parametrize("seed", range(3))
def test_solve_optimal_positive_minimum_against_grid(seed):
    rng = np.random.default_rng(100 + seed)
    M = rng.uniform(0, 0.4, (4, 4))  # no fixed point on the simplex
    res = solve_optimal(M)
    grid, arg = grid_min_residual(M, steps=100)
    assert res.objective <= grid + 1e-9
    # the grid minimiser is within one cell of the true one
    assert grid - res.objective < 0.02
    assert res.pg_norm < 1e-10 or res.converged


@given(arrays(float, (4, 4), elements=st.floats(0, 2)))
def test_solve_optimal_never_worse_than_uniform(M):
    with warnings.catch_warnings():
        warnings.simplefilter("ignore", RuntimeWarning)
        res = solve_optimal(M, max_iter=500)
    A = M - np.eye(4)
    assert res.objective <= np.linalg.norm(A @ np.full(4, 0.25)) + 1e-12
    assert abs(res.p.sum() - 1) < 1e-9 and np.all(res.p >= 0)


def test_solve_optimal_warns_on_iteration_cap():
    rng = np.random.default_rng(9)
    M = rng.uniform(0, 0.4, (6, 6))
    with pytest.warns(RuntimeWarning):
        res = solve_optimal(M, max_iter=1, tol=1e-300)
    assert not res.converged


def test_relative_error():
    assert relative_error(0.11, 0.10) == pytest.approx(0.1)
    assert relative_error(0.3, 0.3) == 0
    with pytest.raises(NumericalError):
        relative_error(0.1, 0.0)


@pytest.mark.parametrize("kind,seed", [("ba", 0), ("ba", 1), ("complete", 0)])
def test_iteration_never_beats_oracle(kind, seed):
    net = generate_ba(40, 3, 2, seed) if kind == "ba" else generate_complete(40, seed)
    rows = compare_methods(ImpactModel(net, derive_balance_sheets(net, rng_seed=seed)))
    assert all(r.rel_err >= -1e-8 for r in rows)


def test_dominant_eigenvector_examples():
    res = dominant_eigenvector(np.array([[2.0, 0.0], [0.0, 1.0]]))
    assert np.allclose(res.vector, [1, 0], atol=1e-12) and res.eigenvalue == pytest.approx(2)
    swap = np.array([[0.0, 1.0], [1.0, 0.0]])
    plain = dominant_eigenvector(swap, max_iter=1000, start=np.array([0.9, 0.1]))
    assert not plain.converged
    avg, _ = averaged_power_method(swap, np.array([0.9, 0.1]), tol=1e-5)
    assert np.allclose(avg, [0.5, 0.5], atol=1e-4)


def test_dominant_eigenvector_against_charpoly():
    rng = np.random.default_rng(12)
    for _ in range(30):
        M = rng.uniform(0.05, 1, (6, 6))
        v, lam = perron_vector(M)
        res = dominant_eigenvector(M, tol=1e-14)
        assert np.max(np.abs(res.vector - v)) < 1e-8
        assert res.eigenvalue == pytest.approx(lam, rel=1e-8)


def test_reducible_flag():
    res = dominant_eigenvector(np.array([[1.0, 1.0], [0.0, 0.5]]), start=np.array([1.0, 0.0]))
    assert res.reducible
    assert not dominant_eigenvector(np.ones((3, 3))).reducible


def test_collapse_raises():
    with pytest.raises(NumericalError):
        dominant_eigenvector(np.zeros((2, 2)))
