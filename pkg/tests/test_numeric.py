import math

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from ffep.exceptions import InvalidArgumentError, SingularMatrixError
from ffep.numeric import gauss_legendre_rule, invert_dense, max_norm, solve_dense


def test_one_point_rule_is_midpoint():
    rule = gauss_legendre_rule(1)
    assert rule.nodes.tolist() == [0.5]
    assert rule.weights.tolist() == [1.0]
    assert rule.order == 1


def test_two_point_rule_matches_roots():
    # shifted P_2 is proportional to 6t^2 - 6t + 1
    roots = np.sort(np.roots([6.0, -6.0, 1.0]))
    rule = gauss_legendre_rule(2)
    np.testing.assert_allclose(rule.nodes, roots, atol=1e-15)
    np.testing.assert_allclose(rule.weights, [0.5, 0.5], atol=1e-15)


def test_five_points_integrate_degree_nine():
    assert gauss_legendre_rule(5).integrate(lambda t: t**9) == pytest.approx(0.1, abs=1e-15)


@pytest.mark.parametrize("s", [2, 3, 7, 16, 33, 64])
def test_matches_numpy_leggauss(s):
    x, w = np.polynomial.legendre.leggauss(s)
    rule = gauss_legendre_rule(s)
    np.testing.assert_allclose(rule.nodes, (x + 1) / 2, atol=1e-14)
    np.testing.assert_allclose(rule.weights, w / 2, atol=1e-14)


@pytest.mark.parametrize("s", [1, 2, 5, 20, 64])
def test_rule_structure(s):
    rule = gauss_legendre_rule(s)
    assert abs(rule.weights.sum() - 1.0) <= 4e-16 * s
    assert np.all(np.diff(rule.nodes) > 0)
    assert np.all(rule.weights > 0)
    np.testing.assert_allclose(rule.nodes, 1 - rule.nodes[::-1], atol=1e-16)


def test_rule_arrays_are_read_only():
    rule = gauss_legendre_rule(4)
    with pytest.raises(ValueError):
        rule.nodes[0] = 0.0


@pytest.mark.parametrize("s", [0, 65, -1, 2.5, True])
def test_rule_rejects_bad_size(s):
    with pytest.raises(InvalidArgumentError):
        gauss_legendre_rule(s)


@settings(max_examples=60, deadline=None)
@given(s=st.integers(1, 20), data=st.data())
def test_exact_for_monomials(s, data):
    k = data.draw(st.integers(0, 2 * s - 1))
    assert gauss_legendre_rule(s).integrate(lambda t: t**k) == pytest.approx(1.0 / (k + 1), rel=1e-13, abs=1e-15)


def test_integrate_on_subinterval_and_vector_valued():
    rule = gauss_legendre_rule(6)
    assert rule.integrate(np.sin, 0.0, math.pi) == pytest.approx(2.0, abs=1e-6)
    out = rule.integrate(lambda t: np.stack([t, t**2], axis=-1), 0.0, 2.0)
    np.testing.assert_allclose(out, [2.0, 8.0 / 3.0], rtol=1e-14)


def test_solve_dense_example():
    A = np.array([[4.0, 1.0], [2.0, 3.0]])
    np.testing.assert_allclose(solve_dense(A, [1.0, 2.0]), [0.1, 0.6], atol=1e-15)


def test_solve_dense_multiple_rhs():
    A = np.array([[2.0, 0.0], [0.0, 4.0]])
    np.testing.assert_allclose(solve_dense(A, np.eye(2)), np.diag([0.5, 0.25]))


@settings(max_examples=50, deadline=None)
@given(n=st.integers(1, 12), seed=st.integers(0, 2**31 - 1))
def test_solve_dense_residual(n, seed):
    rng = np.random.default_rng(seed)
    A = rng.standard_normal((n, n)) + n * np.eye(n)
    b = rng.standard_normal(n)
    x = solve_dense(A, b)
    assert np.max(np.abs(A @ x - b)) <= 1e-12 * (1 + np.max(np.abs(b)))


@settings(max_examples=50, deadline=None)
@given(n=st.integers(1, 12), seed=st.integers(0, 2**31 - 1))
def test_invert_dense_is_inverse(n, seed):
    rng = np.random.default_rng(seed)
    A = rng.standard_normal((n, n)) + n * np.eye(n)
    np.testing.assert_allclose(A @ invert_dense(A), np.eye(n), atol=1e-12)


@pytest.mark.parametrize(
    "A",
    [np.zeros((2, 2)), np.array([[1.0, 2.0], [2.0, 4.0]]), np.array([[1.0, 1.0], [1.0, 1.0 + 1e-17]])],
)
def test_singular_matrix_raises(A):
    with pytest.raises(SingularMatrixError):
        solve_dense(A, np.ones(2))


@pytest.mark.parametrize("A", [np.ones((2, 3)), np.ones(3), np.eye(65), np.array([[np.nan, 0.0], [0.0, 1.0]])])
def test_bad_matrix_shape_or_content(A):
    with pytest.raises(InvalidArgumentError):
        invert_dense(A)


def test_rhs_shape_mismatch():
    with pytest.raises(InvalidArgumentError):
        solve_dense(np.eye(2), np.ones(3))


def test_max_norm():
    assert max_norm([1.0, -3.0, 2.0]) == 3.0
    assert max_norm(np.zeros(0)) == 0.0
