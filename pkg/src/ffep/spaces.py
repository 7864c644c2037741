"""Fitting spaces on the unit step interval.

A :class:`FunctionSpaceSpec` describes ``Y = span{phi_0, ..., phi_{r-1}}`` in
physical time.  For a step size ``h`` the basis is pulled back to the unit
interval, ``phi~_i(tau) = phi_i(tau * h)``; everything the integrator needs
(an orthonormal basis, the reproducing kernel of the L2[0, 1] projection, a
Lagrange basis at collocation nodes and its antiderivatives) is built from
that scaled basis.

All basis callables are vectorised over ``t``.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from typing import Callable, Optional

import numpy as np

from .exceptions import (
    DegenerateBasisError,
    InvalidArgumentError,
    SingularInterpolationError,
    SingularMatrixError,
)
from .numeric import QuadratureRule, gauss_legendre_rule, invert_dense

POLYNOMIAL = "polynomial"
TRIG_COS = "trig-cos"
CUSTOM = "custom"

MAX_POLY_DIM = 12
SMALL_V = 1e-6
NODE_GAP = 1e-8
INTERP_SINGULAR_TOL = 1e-12

BasisFn = Callable[[int, np.ndarray], np.ndarray]


@dataclass(frozen=True)
class FunctionSpaceSpec:
    """The fitting space ``Y`` in physical time.

    ``antiderivative(i, t)``, when given, returns the integral of ``phi_i``
    over ``[0, t]``; otherwise antiderivatives are computed by quadrature.
    """

    r: int
    basis_eval: BasisFn
    kind: str = CUSTOM
    parameters: tuple = ()
    antiderivative: Optional[BasisFn] = field(default=None, compare=False)

    @property
    def omega(self) -> float:
        if self.kind != TRIG_COS:
            raise AttributeError("only trigonometric spaces carry a frequency")
        return self.parameters[0]

    def evaluate(self, t) -> np.ndarray:
        """Stack ``phi_i(t)`` into an array of shape ``(r, len(t))``."""
        t = np.atleast_1d(np.asarray(t, dtype=float))
        return np.array([np.broadcast_to(self.basis_eval(i, t), t.shape) for i in range(self.r)])


def _monomial(i, t):
    return np.asarray(t, dtype=float) ** i


def _monomial_antiderivative(i, t):
    return np.asarray(t, dtype=float) ** (i + 1) / (i + 1)


def make_polynomial_space(r: int) -> FunctionSpaceSpec:
    """Monomials ``1, t, ..., t^(r-1)``."""
    if isinstance(r, bool) or not isinstance(r, (int, np.integer)) or not 1 <= r <= MAX_POLY_DIM:
        raise InvalidArgumentError(f"polynomial space dimension must lie in [1, {MAX_POLY_DIM}], got {r!r}")
    return FunctionSpaceSpec(
        r=int(r), basis_eval=_monomial, kind=POLYNOMIAL, antiderivative=_monomial_antiderivative
    )


def make_trig_cos_space(omega: float) -> FunctionSpaceSpec:
    """One-dimensional space spanned by ``cos(omega t)``."""
    omega = float(omega)
    if not math.isfinite(omega):
        raise InvalidArgumentError(f"frequency must be finite, got {omega}")

    def basis(i, t):
        return np.cos(omega * np.asarray(t, dtype=float))

    def anti(i, t):
        t = np.asarray(t, dtype=float)
        return t * sin_ratio(omega * t)

    return FunctionSpaceSpec(r=1, basis_eval=basis, kind=TRIG_COS, parameters=(omega,), antiderivative=anti)


def make_custom_space(functions, antiderivatives=None) -> FunctionSpaceSpec:
    """Space spanned by arbitrary vectorised callables ``f(t)``.

    Linear independence is checked on [0, 1] through the Gram matrix of the
    functions normalised to unit norm.
    """
    functions = tuple(functions)
    if not functions:
        raise InvalidArgumentError("a fitting space needs at least one basis function")

    def basis(i, t):
        return functions[i](np.asarray(t, dtype=float))

    anti = None
    if antiderivatives is not None:
        antiderivatives = tuple(antiderivatives)
        if len(antiderivatives) != len(functions):
            raise InvalidArgumentError("need one antiderivative per basis function")

        def anti(i, t):
            return antiderivatives[i](np.asarray(t, dtype=float))

    spec = FunctionSpaceSpec(r=len(functions), basis_eval=basis, kind=CUSTOM, antiderivative=anti)
    rule = gauss_legendre_rule(max(2 * spec.r, 20))
    vals = spec.evaluate(rule.nodes)
    if not np.all(np.isfinite(vals)):
        raise InvalidArgumentError("basis functions must be finite on [0, 1]")
    gram = (vals * rule.weights) @ vals.T
    d = np.sqrt(np.diag(gram))
    if np.any(d == 0.0):
        raise DegenerateBasisError("a basis function vanishes identically on [0, 1]")
    if np.min(np.linalg.eigvalsh(gram / np.outer(d, d))) <= 1e-10:
        raise DegenerateBasisError("basis functions are not linearly independent on [0, 1]")
    return spec


# ---------------------------------------------------------------------------
# small-argument-safe scalar ratios
# ---------------------------------------------------------------------------

def sin_ratio(x):
    """``sin(x) / x`` with the removable singularity filled in."""
    x = np.asarray(x, dtype=float)
    small = np.abs(x) < SMALL_V
    safe = np.where(small, 1.0, x)
    x2 = x * x
    return np.where(small, 1.0 - x2 / 6.0 + x2 * x2 / 120.0, np.sin(safe) / safe)


def half_sin_ratio(v):
    """``2 sin(v/2) / v``."""
    return sin_ratio(0.5 * np.asarray(v, dtype=float))


def half_tan_ratio(v):
    """``tan(v/2) / v``."""
    v = np.asarray(v, dtype=float)
    small = np.abs(v) < SMALL_V
    safe = np.where(small, 1.0, v)
    v2 = v * v
    return np.where(small, 0.5 + v2 / 24.0 + v2 * v2 / 240.0, np.tan(0.5 * safe) / safe)


def sine_fraction(v, tau):
    """``sin(v tau) / sin(v)``; reduces to ``tau`` at ``v = 0``."""
    v = np.asarray(v, dtype=float)
    tau = np.asarray(tau, dtype=float)
    return tau * sin_ratio(v * tau) / sin_ratio(v)


# ---------------------------------------------------------------------------
# scaled, orthonormal and Lagrange bases
# ---------------------------------------------------------------------------

@dataclass(frozen=True)
class ScaledBasis:
    """``phi~_i(tau) = phi_i(tau h)`` on [0, 1]."""

    spec: FunctionSpaceSpec
    h: float

    @property
    def r(self) -> int:
        return self.spec.r

    @property
    def v(self) -> float:
        """Dimensionless frequency ``omega h`` (trigonometric spaces only)."""
        return self.spec.omega * self.h

    def eval(self, i: int, tau):
        return self.spec.basis_eval(i, np.asarray(tau, dtype=float) * self.h)

    def evaluate(self, tau) -> np.ndarray:
        tau = np.atleast_1d(np.asarray(tau, dtype=float))
        return self.spec.evaluate(tau * self.h)


def scale_basis(spec: FunctionSpaceSpec, h: float) -> ScaledBasis:
    h = float(h)
    if not math.isfinite(h) or h < 0.0:
        raise InvalidArgumentError(f"step size must be finite and non-negative, got {h}")
    return ScaledBasis(spec, h)


def default_quad_points(spec: FunctionSpaceSpec, h: float) -> int:
    """Gauss points used for inner products and the kernel integral.

    Oscillatory spaces get four extra points per half period of ``omega h``.
    """
    s = max(2 * spec.r, 10)
    if spec.kind == TRIG_COS:
        v = abs(spec.omega * h)
        s = max(s, 4 * math.ceil(v / math.pi) + 6)
    return min(s, 64)


def shifted_legendre(j: int, t):
    """Orthonormal shifted Legendre polynomial of degree ``j`` on [0, 1].

    Evaluated through the three-term recurrence in ``x = 2t - 1``, which is
    the same polynomial as the explicit binomial sum but free of its
    cancellation for larger ``j``.
    """
    if not 0 <= j <= MAX_POLY_DIM:
        raise InvalidArgumentError(f"degree must lie in [0, {MAX_POLY_DIM}], got {j}")
    x = 2.0 * np.asarray(t, dtype=float) - 1.0
    p0 = np.ones_like(x)
    if j == 0:
        return p0
    p1 = x
    for k in range(2, j + 1):
        p0, p1 = p1, ((2 * k - 1) * x * p1 - (k - 1) * p0) / k
    return math.sqrt(2 * j + 1) * p1


def _shifted_legendre_power_coeffs(r: int) -> np.ndarray:
    # row j: coefficients of p^_j in powers of tau
    c = np.zeros((r, r))
    for j in range(r):
        for k in range(j + 1):
            c[j, k] = (-1) ** (j + k) * math.comb(j, k) * math.comb(j + k, k)
        c[j] *= math.sqrt(2 * j + 1)
    return c


@dataclass(frozen=True)
class OrthonormalBasis:
    """An L2[0, 1]-orthonormal basis ``psi~`` of ``Y_h``.

    ``coeffs[i, k]`` expresses ``psi~_i`` in the scaled basis ``phi~_k``; it
    is ``None`` when that representation does not exist (polynomial space
    at ``h = 0``).
    """

    basis: ScaledBasis
    gram_rule: QuadratureRule
    coeffs: Optional[np.ndarray]
    closed_form: bool = False

    @property
    def r(self) -> int:
        return self.basis.r

    def evaluate(self, tau) -> np.ndarray:
        tau = np.atleast_1d(np.asarray(tau, dtype=float))
        if self.closed_form:
            return np.array([shifted_legendre(i, tau) for i in range(self.r)])
        return self.coeffs @ self.basis.evaluate(tau)

    def psi_eval(self, i: int, tau):
        tau = np.asarray(tau, dtype=float)
        return self.evaluate(tau.ravel())[i].reshape(tau.shape)

    def kernel(self, tau, sigma):
        return projection_kernel(self, tau, sigma)


def _gram_schmidt(vals: np.ndarray, w: np.ndarray) -> np.ndarray:
    """Modified Gram-Schmidt on sampled functions; returns the coefficient matrix."""
    r = vals.shape[0]
    v = vals.astype(float).copy()
    c = np.eye(r)
    for i in range(r):
        norm0 = math.sqrt(float(np.dot(w, v[i] * v[i])))
        if norm0 == 0.0 or not math.isfinite(norm0):
            raise DegenerateBasisError(f"basis function {i} has zero or non-finite norm on [0, 1]")
        sweeps = 1
        sweep = 0
        while sweep < sweeps:
            for j in range(i):
                proj = float(np.dot(w, v[i] * v[j]))
                if sweep == 0 and abs(proj) > 0.5 * norm0:
                    sweeps = 2
                v[i] -= proj * v[j]
                c[i] -= proj * c[j]
            sweep += 1
        norm = math.sqrt(float(np.dot(w, v[i] * v[i])))
        if norm < 1e-10 * norm0:
            raise DegenerateBasisError(
                f"basis function {i} is numerically dependent on the previous ones "
                f"(residual norm ratio {norm / norm0:.2e})"
            )
        v[i] /= norm
        c[i] /= norm
    return c


def orthonormalize(basis: ScaledBasis, rule: Optional[QuadratureRule] = None, method: str = "auto") -> OrthonormalBasis:
    """Orthonormal basis of ``Y_h`` under the L2[0, 1] inner product.

    ``method="auto"`` uses the shifted Legendre closed form for polynomial
    spaces and modified Gram-Schmidt otherwise; ``"gram-schmidt"`` forces
    the numerical route.
    """
    if method not in ("auto", "gram-schmidt"):
        raise InvalidArgumentError(f"unknown orthonormalization method {method!r}")
    if rule is None:
        rule = gauss_legendre_rule(default_quad_points(basis.spec, basis.h))
    spec = basis.spec
    if method == "auto" and spec.kind == POLYNOMIAL:
        coeffs = None
        if basis.h > 0:
            coeffs = _shifted_legendre_power_coeffs(spec.r) / basis.h ** np.arange(spec.r)
        return OrthonormalBasis(basis, rule, coeffs, closed_form=True)
    vals = basis.evaluate(rule.nodes)
    return OrthonormalBasis(basis, rule, _gram_schmidt(vals, rule.weights))


def projection_kernel(onb: OrthonormalBasis, tau, sigma):
    """Reproducing kernel ``P(tau, sigma) = sum_i psi~_i(tau) psi~_i(sigma)``.

    Broadcasts ``tau`` against ``sigma``.  Both arguments go through the
    same summation order, so the result is bitwise symmetric.
    """
    tau, sigma = np.broadcast_arrays(np.asarray(tau, dtype=float), np.asarray(sigma, dtype=float))
    shape = tau.shape
    pt = onb.evaluate(tau.ravel())
    ps = onb.evaluate(sigma.ravel())
    out = pt[0] * ps[0]
    for i in range(1, onb.r):
        out = out + pt[i] * ps[i]
    return out.reshape(shape) if shape else out[0]


@dataclass(frozen=True)
class LagrangeBasis:
    """Generalized Lagrange basis ``l^_i`` of ``Y_h`` with ``l^_i(d_j) = delta_ij``.

    ``interp_eval`` and ``interp_anti`` are the (possibly re-parametrised)
    spanning functions and their antiderivatives on [0, 1]; ``minv`` maps
    them to the cardinal basis.
    """

    basis: ScaledBasis
    nodes: np.ndarray
    minv: np.ndarray
    interp_eval: Callable[[np.ndarray], np.ndarray] = field(repr=False)
    interp_anti: Callable[[np.ndarray], np.ndarray] = field(repr=False)

    @property
    def r(self) -> int:
        return len(self.nodes)

    def evaluate(self, tau) -> np.ndarray:
        """``l^_i(tau)`` as an array of shape ``(r, len(tau))``."""
        tau = np.atleast_1d(np.asarray(tau, dtype=float))
        return self.minv.T @ self.interp_eval(tau)

    def integrals(self, tau) -> np.ndarray:
        """``a_{tau,i}``, the integral of ``l^_i`` over ``[0, tau]``, shape ``(r, len(tau))``."""
        tau = np.atleast_1d(np.asarray(tau, dtype=float))
        return self.minv.T @ self.interp_anti(tau)

    def l_eval(self, i: int, tau):
        tau = np.asarray(tau, dtype=float)
        return self.evaluate(tau.ravel())[i].reshape(tau.shape)

    def integral(self, i: int, tau):
        tau = np.asarray(tau, dtype=float)
        return self.integrals(tau.ravel())[i].reshape(tau.shape)


def default_nodes(r: int) -> np.ndarray:
    """Gauss-Legendre nodes on [0, 1]; the midpoint for ``r = 1``."""
    return np.array(gauss_legendre_rule(r).nodes)


def _interpolation_functions(basis: ScaledBasis):
    spec = basis.spec
    if spec.kind == POLYNOMIAL:
        # Y_h does not depend on h here; the unscaled monomials keep the
        # node matrix well conditioned at small steps.
        powers = np.arange(spec.r)

        def ev(tau):
            return tau[None, :] ** powers[:, None]

        def anti(tau):
            return tau[None, :] ** (powers[:, None] + 1) / (powers[:, None] + 1)

        return ev, anti

    if spec.kind == TRIG_COS:
        v = basis.v

        def ev(tau):
            return np.cos(v * tau)[None, :]

        def anti(tau):
            return (tau * sin_ratio(v * tau))[None, :]

        return ev, anti

    h = basis.h
    if spec.antiderivative is not None and h > 0:

        def anti(tau):
            return np.array([spec.antiderivative(i, tau * h) / h for i in range(spec.r)])

    else:
        rule = gauss_legendre_rule(default_quad_points(spec, h))

        def anti(tau):
            # integral over [0, tau] by the rule mapped onto that interval
            pts = tau[:, None] * rule.nodes[None, :]
            vals = basis.evaluate(pts.ravel()).reshape(spec.r, *pts.shape)
            return (vals @ rule.weights) * tau[None, :]

    return basis.evaluate, anti


def lagrange_basis(basis: ScaledBasis, nodes=None) -> LagrangeBasis:
    """Cardinal basis of ``Y_h`` at ``r`` distinct nodes in [0, 1]."""
    r = basis.r
    nodes = default_nodes(r) if nodes is None else np.asarray(nodes, dtype=float).ravel()
    if len(nodes) != r:
        raise InvalidArgumentError(f"need exactly {r} nodes, got {len(nodes)}")
    if np.any(nodes < 0.0) or np.any(nodes > 1.0) or not np.all(np.isfinite(nodes)):
        raise InvalidArgumentError(f"nodes must lie in [0, 1], got {nodes}")
    if r > 1 and np.min(np.diff(np.sort(nodes))) < NODE_GAP:
        raise InvalidArgumentError(f"nodes must be pairwise separated by at least {NODE_GAP}, got {nodes}")

    ev, anti = _interpolation_functions(basis)
    m = ev(nodes).T  # m[j, k] = f_k(d_j)
    # scale columns by the size of each function on [0, 1] so the
    # singularity test is meaningful for a single near-vanishing entry
    probe = np.concatenate(([0.0, 1.0], gauss_legendre_rule(max(2 * r, 10)).nodes))
    col_scale = np.max(np.abs(ev(probe)), axis=1)
    if np.any(col_scale == 0.0):
        raise DegenerateBasisError("a basis function vanishes identically on [0, 1]")
    scaled = m / col_scale
    try:
        # columns have unit size on [0, 1], so an absolute test applies
        # (a 1x1 matrix is never singular in the relative sense)
        if np.linalg.svd(scaled, compute_uv=False)[-1] < INTERP_SINGULAR_TOL:
            raise SingularMatrixError("smallest singular value of the scaled node matrix is negligible")
        minv = invert_dense(scaled) / col_scale[:, None]
    except SingularMatrixError:
        detail = f"kind={basis.spec.kind}, h={basis.h}, nodes={nodes.tolist()}"
        if basis.spec.kind == TRIG_COS:
            detail += f", v={basis.v}"
        raise SingularInterpolationError(f"node-evaluation matrix is singular ({detail})") from None
    nodes = nodes.copy()
    nodes.setflags(write=False)
    return LagrangeBasis(basis, nodes, minv, ev, anti)


def lagrange_integral(lb: LagrangeBasis, tau, i: int):
    """``a_{tau,i}``: integral of the ``i``-th cardinal function over ``[0, tau]``.

    ``i`` is zero-based.
    """
    return lb.integral(i, tau)
