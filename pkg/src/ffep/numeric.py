"""Small dense numerics: Gauss-Legendre rules on [0, 1] and LU solves."""

from __future__ import annotations

import functools
import warnings
from dataclasses import dataclass

import numpy as np
import scipy.linalg

from .exceptions import InvalidArgumentError, SingularMatrixError

MAX_RULE_POINTS = 64
MAX_DENSE_SIZE = 64
SINGULAR_RTOL = 1e-14


@dataclass(frozen=True)
class QuadratureRule:
    """Nodes and weights of an interpolatory rule on [0, 1].

    ``order`` is the polynomial exactness degree.
    """

    nodes: np.ndarray
    weights: np.ndarray
    order: int

    @property
    def size(self) -> int:
        return len(self.nodes)

    def integrate(self, f, a: float = 0.0, b: float = 1.0):
        """Approximate the integral of ``f`` over ``[a, b]``.

        ``f`` is called once with the array of mapped nodes and may return
        an array whose leading axis runs over the nodes.
        """
        t = a + (b - a) * self.nodes
        vals = np.asarray(f(t))
        return (b - a) * np.tensordot(self.weights, vals, axes=(0, 0))


def _legendre_and_derivative(n: int, x: np.ndarray):
    p0 = np.ones_like(x)
    p1 = x.copy()
    for k in range(2, n + 1):
        p0, p1 = p1, ((2 * k - 1) * x * p1 - (k - 1) * p0) / k
    dp = n * (x * p1 - p0) / (x * x - 1.0)
    return p1, dp


@functools.lru_cache(maxsize=None)
def _gauss_legendre_cached(s: int):
    if s == 1:
        nodes = np.array([0.5])
        weights = np.array([1.0])
    else:
        # Chebyshev-type initial guesses for the roots of P_s on [-1, 1]
        k = np.arange(1, s + 1)
        x = np.cos(np.pi * (k - 0.25) / (s + 0.5))
        for _ in range(100):
            p, dp = _legendre_and_derivative(s, x)
            dx = p / dp
            x = x - dx
            if np.max(np.abs(dx)) <= 1e-15:
                break
        _, dp = _legendre_and_derivative(s, x)
        w = 2.0 / ((1.0 - x * x) * dp * dp)
        # roots come out descending; symmetrize to kill the last ulp of drift
        x = 0.5 * (x - x[::-1])
        w = 0.5 * (w + w[::-1])
        nodes = (1.0 - x) / 2.0
        weights = w / 2.0
    nodes.setflags(write=False)
    weights.setflags(write=False)
    return QuadratureRule(nodes=nodes, weights=weights, order=2 * s - 1)


def gauss_legendre_rule(s: int) -> QuadratureRule:
    """Return the ``s``-point Gauss-Legendre rule mapped to [0, 1].

    >>> gauss_legendre_rule(1).nodes
    array([0.5])
    """
    if isinstance(s, bool) or not isinstance(s, (int, np.integer)):
        raise InvalidArgumentError(f"number of points must be an integer, got {s!r}")
    if not 1 <= s <= MAX_RULE_POINTS:
        raise InvalidArgumentError(f"number of points must lie in [1, {MAX_RULE_POINTS}], got {s}")
    return _gauss_legendre_cached(int(s))


def _lu(A):
    A = np.asarray(A, dtype=float)
    if A.ndim != 2 or A.shape[0] != A.shape[1]:
        raise InvalidArgumentError(f"expected a square matrix, got shape {A.shape}")
    n = A.shape[0]
    if n > MAX_DENSE_SIZE:
        raise InvalidArgumentError(f"dense solves are limited to n <= {MAX_DENSE_SIZE}, got {n}")
    if not np.all(np.isfinite(A)):
        raise InvalidArgumentError("matrix has non-finite entries")
    scale = np.max(np.sum(np.abs(A), axis=1)) if n else 0.0
    with warnings.catch_warnings():
        warnings.simplefilter("ignore", scipy.linalg.LinAlgWarning)
        lu, piv = scipy.linalg.lu_factor(A, check_finite=False)
    pivots = np.abs(np.diag(lu))
    if n and (scale == 0.0 or np.min(pivots) < SINGULAR_RTOL * scale):
        raise SingularMatrixError(
            f"matrix is numerically singular (smallest pivot {np.min(pivots):.3e}, "
            f"||A||_inf = {scale:.3e})"
        )
    return lu, piv


def solve_dense(A, b) -> np.ndarray:
    """Solve ``A x = b`` by LU with partial pivoting.

    ``b`` may be a vector or a matrix of right-hand sides.
    """
    lu, piv = _lu(A)
    b = np.asarray(b, dtype=float)
    if b.shape[0] != lu.shape[0]:
        raise InvalidArgumentError(f"right-hand side has {b.shape[0]} rows, matrix has {lu.shape[0]}")
    return scipy.linalg.lu_solve((lu, piv), b, check_finite=False)


def invert_dense(A) -> np.ndarray:
    lu, piv = _lu(A)
    return scipy.linalg.lu_solve((lu, piv), np.eye(lu.shape[0]), check_finite=False)


def max_norm(x) -> float:
    x = np.asarray(x)
    return float(np.max(np.abs(x))) if x.size else 0.0
