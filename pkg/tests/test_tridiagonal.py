import numpy as np
import pytest

from cnlse import SolverError, solve_tridiagonal


def test_identity_returns_rhs():
    rhs = np.array([1 + 2j, -3.5, 0.25j, 7.0])
    y = solve_tridiagonal(np.zeros(3), np.ones(4), np.zeros(3), rhs)
    assert np.array_equal(y, rhs)


def test_two_by_two_hand_solved():
    # ((2,1),(1,2)) y = (3,3) has the solution (1,1)
    y = solve_tridiagonal([1.0], [2.0, 2.0], [1.0], [3.0, 3.0])
    assert np.allclose(y, [1.0, 1.0], rtol=0, atol=1e-14)


def test_single_row_system():
    y = solve_tridiagonal([], [2.0j], [], [4.0])
    assert np.allclose(y, [-2.0j])


def _random_system(rng, n):
    lower = rng.normal(size=n - 1) + 1j * rng.normal(size=n - 1)
    upper = rng.normal(size=n - 1) + 1j * rng.normal(size=n - 1)
    diag = rng.normal(size=n) + 1j * rng.normal(size=n)
    # keep the system comfortably non-singular
    diag += 4.0 * (1 + 1j)
    rhs = rng.normal(size=n) + 1j * rng.normal(size=n)
    return lower, diag, upper, rhs


def _dense(lower, diag, upper):
    n = len(diag)
    a = np.zeros((n, n), dtype=complex)
    a[np.arange(n), np.arange(n)] = diag
    a[np.arange(1, n), np.arange(n - 1)] = lower
    a[np.arange(n - 1), np.arange(1, n)] = upper
    return a


def test_random_system_against_dense_oracle():
    rng = np.random.default_rng(42)
    lower, diag, upper, rhs = _random_system(rng, 50)
    y = solve_tridiagonal(lower, diag, upper, rhs)
    a = _dense(lower, diag, upper)
    y_dense = np.linalg.solve(a, rhs)
    residual = np.linalg.norm(a @ y - rhs) / np.linalg.norm(rhs)
    assert residual <= 1e-12
    assert np.allclose(y, y_dense, rtol=1e-10, atol=1e-12)


def test_many_sizes_against_dense_oracle():
    rng = np.random.default_rng(3)
    for n in (2, 3, 5, 17, 33):
        lower, diag, upper, rhs = _random_system(rng, n)
        y = solve_tridiagonal(lower, diag, upper, rhs)
        a = _dense(lower, diag, upper)
        residual = np.linalg.norm(a @ y - rhs) / np.linalg.norm(rhs)
        assert residual <= 1e-12


def test_zero_diagonal_is_pivoted_not_fatal():
    # ((0,1),(1,0)) is non-singular; partial pivoting must handle it.
    y = solve_tridiagonal([1.0], [0.0, 0.0], [1.0], [2.0, 3.0])
    assert np.allclose(y, [3.0, 2.0])


def test_singular_system_raises():
    with pytest.raises(SolverError):
        solve_tridiagonal([1.0], [1.0, 1.0], [1.0], [1.0, 1.0])


def test_shape_validation():
    with pytest.raises(ValueError):
        solve_tridiagonal([1.0], [1.0, 1.0, 1.0], [1.0], [1.0, 1.0, 1.0])
    with pytest.raises(ValueError):
        solve_tridiagonal([], [], [], [])
