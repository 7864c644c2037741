"""Generic r-stage functionally-fitted energy-preserving step.

One step from ``y0`` solves for stage vectors ``X_i`` (``i = 1..r``)

    X_i = h B(y_{d_i}) sum_j b_j P(d_i, c_j) grad H(y_{c_j}),
    y_sigma = y0 + sum_i a_{sigma,i} X_i,

by fixed-point iteration, then sets ``y1 = y0 + sum_i a_{1,i} X_i``.  Here
``d_i`` are collocation nodes, ``(c_j, b_j)`` a Gauss rule, ``P`` the
projection kernel of the fitting space and ``a_{sigma,i}`` the integrals of
its Lagrange basis.
"""

from __future__ import annotations

import functools
import math
from dataclasses import dataclass, field
from typing import Callable, Optional

import numpy as np

from .exceptions import DivergenceError, InvalidArgumentError, NonConvergenceError
from .numeric import QuadratureRule, gauss_legendre_rule
from .spaces import (
    FunctionSpaceSpec,
    LagrangeBasis,
    OrthonormalBasis,
    default_quad_points,
    lagrange_basis,
    orthonormalize,
    scale_basis,
)

ACCEPT = "accept-with-flag"
ERROR = "error"


@dataclass(frozen=True)
class PoissonSystem:
    """``dy/dt = B(y) grad H(y)`` with skew-symmetric ``B``.

    The callables are vectorised over leading axes: ``b_matrix`` maps
    ``(..., d)`` to ``(..., d, d)``, ``grad_h`` maps ``(..., d)`` to
    ``(..., d)`` and ``hamiltonian`` maps ``(..., d)`` to ``(...)``.  Use
    :meth:`from_pointwise` to wrap functions that only handle one state.
    """

    dim: int
    b_matrix: Callable[[np.ndarray], np.ndarray]
    grad_h: Callable[[np.ndarray], np.ndarray]
    hamiltonian: Callable[[np.ndarray], np.ndarray]
    name: str = "poisson"

    @classmethod
    def from_pointwise(cls, dim, b_matrix, grad_h, hamiltonian, name="poisson"):
        def lift(fn, tail):
            def wrapped(y):
                y = np.asarray(y, dtype=float)
                flat = y.reshape(-1, dim)
                out = np.array([fn(row) for row in flat], dtype=float)
                return out.reshape(y.shape[:-1] + tail)

            return wrapped

        return cls(dim, lift(b_matrix, (dim, dim)), lift(grad_h, (dim,)), lift(hamiltonian, ()), name)

    def vector_field(self, y):
        y = np.asarray(y, dtype=float)
        return np.einsum("...ij,...j->...i", self.b_matrix(y), self.grad_h(y))

    def validate(self, y0, n_samples: int = 20, seed: int = 0) -> None:
        """Check skew-symmetry of ``B`` and that ``grad_h`` matches ``H``.

        Probes ``y0`` and random perturbations of it; raises
        :class:`InvalidArgumentError` on failure.
        """
        y0 = np.asarray(y0, dtype=float)
        if y0.shape != (self.dim,):
            raise InvalidArgumentError(f"{self.name}: initial value must have shape ({self.dim},), got {y0.shape}")
        rng = np.random.default_rng(seed)
        scale = 1.0 + np.max(np.abs(y0))
        pts = np.vstack([y0, y0 + 0.1 * scale * rng.standard_normal((n_samples, self.dim))])
        bm = np.asarray(self.b_matrix(pts))
        asym = np.max(np.abs(bm + np.swapaxes(bm, -1, -2)), axis=(-1, -2))
        size = np.max(np.abs(bm), axis=(-1, -2))
        if np.any(asym > 1e-12 * (1.0 + size)):
            raise InvalidArgumentError(f"{self.name}: B(y) is not skew-symmetric")

        for y in pts[: min(10, len(pts))]:
            u = rng.standard_normal(self.dim)
            u /= np.linalg.norm(u)
            eps = 1e-5 * (1.0 + np.max(np.abs(y)))
            fd = (self.hamiltonian(y + eps * u) - self.hamiltonian(y - eps * u)) / (2 * eps)
            exact = float(np.dot(self.grad_h(y), u))
            ref = max(abs(exact), np.linalg.norm(self.grad_h(y)), 1.0)
            if abs(fd - exact) > 1e-6 * ref:
                raise InvalidArgumentError(f"{self.name}: grad_h is inconsistent with the Hamiltonian at {y}")


@dataclass(frozen=True)
class SolverConfig:
    """Stage-iteration settings.

    Iteration stops once the max-norm update of the stage vectors drops to
    ``fp_tol * max(1, |X|_max)``.  ``quad_points=None`` selects the
    space-dependent default.
    """

    fp_tol: float = 1e-15
    fp_max_iter: int = 100
    nonconvergence_policy: str = ACCEPT
    quad_points: Optional[int] = None

    def __post_init__(self):
        if not self.fp_tol > 0:
            raise InvalidArgumentError(f"fp_tol must be positive, got {self.fp_tol}")
        if self.fp_max_iter < 1:
            raise InvalidArgumentError(f"fp_max_iter must be at least 1, got {self.fp_max_iter}")
        if self.nonconvergence_policy not in (ACCEPT, ERROR):
            raise InvalidArgumentError(f"unknown non-convergence policy {self.nonconvergence_policy!r}")

    def rule_for(self, space: FunctionSpaceSpec, h: float) -> QuadratureRule:
        s = self.quad_points if self.quad_points is not None else default_quad_points(space, h)
        return gauss_legendre_rule(s)


DEFAULT_CONFIG = SolverConfig()


@dataclass(frozen=True)
class FixedPointOutcome:
    x: np.ndarray
    iterations: int
    residual: float
    converged: bool


def iterate_fixed_point(g: Callable[[np.ndarray], np.ndarray], x0, cfg: SolverConfig = DEFAULT_CONFIG) -> FixedPointOutcome:
    """Iterate ``x <- g(x)`` until the update is below tolerance.

    Shared by the generic stage solver and the closed-form presets.
    """
    x = np.asarray(x0, dtype=float)
    residual = math.inf
    for k in range(1, cfg.fp_max_iter + 1):
        xn = g(x)
        # a nan or inf anywhere in xn propagates into the residual
        residual = float(np.max(np.abs(xn - x))) if x.size else 0.0
        if not math.isfinite(residual):
            raise DivergenceError(f"non-finite iterate after {k} fixed-point sweeps")
        x = xn
        if residual <= cfg.fp_tol * max(1.0, float(np.max(np.abs(x))) if x.size else 0.0):
            return FixedPointOutcome(x, k, residual, True)
    if cfg.nonconvergence_policy == ERROR:
        raise NonConvergenceError(
            f"fixed-point iteration did not converge in {cfg.fp_max_iter} sweeps (residual {residual:.3e})",
            residual=residual,
            iterations=cfg.fp_max_iter,
        )
    return FixedPointOutcome(x, cfg.fp_max_iter, residual, False)


@dataclass(frozen=True)
class StepPlan:
    """Precomputed tableau for one step size.

    ``A_dn[j, i] = a_{d_j, i}``, ``A_cn[j, i] = a_{c_j, i}``,
    ``A_one[i] = a_{1, i}`` and ``K[i, j] = P(d_i, c_j)``.
    """

    r: int
    h: float
    nodes: np.ndarray
    rule: QuadratureRule
    A_dn: np.ndarray
    A_cn: np.ndarray
    A_one: np.ndarray
    K: np.ndarray
    onb: OrthonormalBasis = field(repr=False)
    lagrange: LagrangeBasis = field(repr=False)

    @functools.cached_property
    def KB(self) -> np.ndarray:
        """Kernel samples pre-multiplied by the quadrature weights."""
        return self.K * self.rule.weights[None, :]


def plan_step(space: FunctionSpaceSpec, nodes=None, h: float = 0.1, cfg: SolverConfig = DEFAULT_CONFIG) -> StepPlan:
    """Build the step tableau for ``space`` at step size ``h``.

    ``nodes=None`` selects Gauss nodes (the midpoint when ``r = 1``).
    """
    basis = scale_basis(space, h)
    rule = cfg.rule_for(space, h)
    onb = orthonormalize(basis, rule)
    lb = lagrange_basis(basis, nodes)
    A_dn = lb.integrals(lb.nodes).T
    A_cn = lb.integrals(rule.nodes).T
    A_one = lb.integrals(np.array([1.0]))[:, 0]
    K = projection_kernel_matrix(onb, lb.nodes, rule.nodes)
    arrays = (A_dn, A_cn, A_one, K)
    if not all(np.all(np.isfinite(a)) for a in arrays):
        raise InvalidArgumentError("step tableau has non-finite entries")
    for a in arrays:
        a.setflags(write=False)
    return StepPlan(space.r, float(h), lb.nodes, rule, A_dn, A_cn, A_one, K, onb, lb)


def projection_kernel_matrix(onb: OrthonormalBasis, tau, sigma) -> np.ndarray:
    """``P(tau_i, sigma_j)`` for all pairs."""
    return onb.evaluate(tau).T @ onb.evaluate(sigma)


@dataclass(frozen=True)
class StepResult:
    """Outcome of one step.

    ``stage_states`` are the states ``y_{d_i}`` at which ``B`` was evaluated
    in the final sweep; ``residual`` is the last max-norm update.
    """

    y1: np.ndarray
    stage_X: np.ndarray
    stage_states: np.ndarray
    iterations: int
    residual: float
    converged: bool


def fixed_point_step(plan: StepPlan, sys: PoissonSystem, y0, cfg: SolverConfig = DEFAULT_CONFIG) -> StepResult:
    y0 = np.asarray(y0, dtype=float)
    if y0.shape != (sys.dim,):
        raise InvalidArgumentError(f"state has shape {y0.shape}, system dimension is {sys.dim}")
    h = plan.h
    A_dn, A_cn, KB = plan.A_dn, plan.A_cn, plan.KB
    last_stage = [np.broadcast_to(y0, (plan.r, sys.dim))]

    def sweep(X):
        yd = y0 + A_dn @ X
        yc = y0 + A_cn @ X
        w = KB @ sys.grad_h(yc)
        last_stage[0] = yd
        return h * np.matmul(sys.b_matrix(yd), w[:, :, None])[:, :, 0]

    try:
        out = iterate_fixed_point(sweep, np.zeros((plan.r, sys.dim)), cfg)
    except DivergenceError as exc:
        raise DivergenceError(f"{exc} (h={h}, r={plan.r})") from None
    X = out.x
    y1 = y0 + plan.A_one @ X
    if not np.all(np.isfinite(y1)):
        raise DivergenceError(f"non-finite state after step (h={h})")
    return StepResult(y1, X, np.array(last_stage[0]), out.iterations, out.residual, out.converged)


def dense_eval(plan: StepPlan, y0, stage_X, tau):
    """Continuous extension ``y_tau = y0 + sum_i a_{tau,i} X_i``.

    ``tau`` may be a scalar or an array; an array gives one row per value.
    """
    y0 = np.asarray(y0, dtype=float)
    tau_arr = np.asarray(tau, dtype=float)
    a = plan.lagrange.integrals(tau_arr.ravel())
    out = y0 + a.T @ np.asarray(stage_X, dtype=float)
    return out[0] if tau_arr.ndim == 0 else out


@dataclass
class Trajectory:
    """Time series produced by repeated stepping."""

    times: np.ndarray
    states: np.ndarray
    energies: np.ndarray
    iteration_counts: np.ndarray
    nonconverged_steps: int = 0

    @property
    def energy_errors(self) -> np.ndarray:
        return self.energies - self.energies[0]

    def __len__(self):
        return len(self.times)


def march(step: Callable[[np.ndarray], StepResult], sys: PoissonSystem, y0, h: float, n_steps: int, t0: float = 0.0) -> Trajectory:
    """Apply ``step`` ``n_steps`` times starting from ``y0`` at ``t0``.

    The first entry of the trajectory is the initial state (zero
    iterations).  A divergence aborts the run; the partial trajectory is
    attached to the raised :class:`DivergenceError`.
    """
    if n_steps < 1:
        raise InvalidArgumentError(f"n_steps must be at least 1, got {n_steps}")
    y = np.asarray(y0, dtype=float).copy()
    states = np.empty((n_steps + 1, y.size))
    iters = np.zeros(n_steps + 1, dtype=int)
    states[0] = y
    bad = 0
    for n in range(1, n_steps + 1):
        try:
            res = step(y)
        except DivergenceError as exc:
            partial = _finish(states[:n], iters[:n], sys, h, t0, bad)
            raise DivergenceError(f"step {n} (t={t0 + n * h:g}): {exc}", partial=partial) from None
        y = res.y1
        states[n] = y
        iters[n] = res.iterations
        bad += not res.converged
    return _finish(states, iters, sys, h, t0, bad)


def _finish(states, iters, sys, h, t0, bad):
    times = t0 + h * np.arange(len(states))
    return Trajectory(times, states, np.asarray(sys.hamiltonian(states), dtype=float), iters, bad)


def integrate(plan: StepPlan, sys: PoissonSystem, y0, n_steps: int, cfg: SolverConfig = DEFAULT_CONFIG, t0: float = 0.0) -> Trajectory:
    return march(lambda y: fixed_point_step(plan, sys, y, cfg), sys, y0, plan.h, n_steps, t0)
