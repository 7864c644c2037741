"""Second-order closed-form schemes and the Legendre family.

The closed forms are solved for ``y1`` directly by fixed-point iteration;
they share :func:`ffep.integrator.iterate_fixed_point` and the Gauss rules
with the generic stage solver but not its tableau, so agreement between
the two is a genuine cross-check.

``tfep1`` is the hyperbolic-prefactor comparator exactly as it is usually
quoted, ``2 sinh(v/2) / (v cosh(v/2))``.  Despite its "trigonometrically
fitted" label the prefactor is hyperbolic; it is kept that way on purpose.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from typing import Optional

import numpy as np

from .exceptions import InvalidArgumentError, InvalidFrequencyError, InvalidMethodError
from .integrator import (
    DEFAULT_CONFIG,
    FixedPointOutcome,
    PoissonSystem,
    SolverConfig,
    StepPlan,
    StepResult,
    fixed_point_step,
    iterate_fixed_point,
    plan_step,
)
from .numeric import QuadratureRule, gauss_legendre_rule
from .spaces import (
    FunctionSpaceSpec,
    SMALL_V,
    default_nodes,
    default_quad_points,
    half_sin_ratio,
    make_polynomial_space,
    make_trig_cos_space,
    sine_fraction,
)

MAX_LEGENDRE_R = 6
# |cos(v/2)| or |sin v| below this makes the fitted coefficients blow up
SINGULAR_V_TOL = 1e-8

METHOD_IDS = ("avf", "epcm1", "ffep1", "tfep1") + tuple(f"legendre-{r}" for r in range(1, MAX_LEGENDRE_R + 1))


def _rule(quad, space: FunctionSpaceSpec, h: float, cfg: SolverConfig) -> QuadratureRule:
    if isinstance(quad, QuadratureRule):
        return quad
    if quad is not None:
        return gauss_legendre_rule(int(quad))
    return cfg.rule_for(space, h)


def _check_state(sys: PoissonSystem, y0):
    y0 = np.asarray(y0, dtype=float)
    if y0.shape != (sys.dim,):
        raise InvalidArgumentError(f"state has shape {y0.shape}, system dimension is {sys.dim}")
    return y0


# ---------------------------------------------------------------------------
# scalar coefficients
# ---------------------------------------------------------------------------

def tfep1_prefactor(v: float) -> float:
    """``2 sinh(v/2) / (v cosh(v/2)) = 2 tanh(v/2) / v``, equal to 1 at ``v = 0``."""
    v = float(v)
    if abs(v) < SMALL_V:
        v2 = v * v
        return 1.0 - v2 / 12.0 + v2 * v2 / 120.0
    return 2.0 * math.tanh(0.5 * v) / v


def check_ffep1_frequency(v: float) -> None:
    """Reject ``v`` where ``cos(v/2)`` or ``sin(v)`` (for ``v != 0``) vanish."""
    if not math.isfinite(v):
        raise InvalidFrequencyError(f"v = omega*h must be finite, got {v}")
    if abs(math.cos(0.5 * v)) < SINGULAR_V_TOL:
        raise InvalidFrequencyError(f"cos(v/2) vanishes at v = {v}")
    if abs(v) >= SMALL_V and abs(math.sin(v)) < SINGULAR_V_TOL:
        raise InvalidFrequencyError(f"sin(v) vanishes at v = {v}")


def ffep1_kernel_at_midpoint(v: float, sigma):
    """``P(1/2, sigma) = 4 v cos(v/2) cos(v sigma) / (2v + sin 2v)``."""
    sigma = np.asarray(sigma, dtype=float)
    if abs(v) < SMALL_V:
        # 4v / (2v + sin 2v) = 1 + v^2/3 + O(v^4)
        scale = 1.0 + v * v / 3.0
    else:
        scale = 4.0 * v / (2.0 * v + math.sin(2.0 * v))
    return scale * math.cos(0.5 * v) * np.cos(v * sigma)


# ---------------------------------------------------------------------------
# closed-form steps
# ---------------------------------------------------------------------------

def _discrete_gradient_step(sys, y0, h, rule, cfg, prefactor=1.0, midpoint_b=True) -> FixedPointOutcome:
    c = rule.nodes[:, None]
    b = rule.weights
    y0 = np.asarray(y0, dtype=float)
    b_const = None if midpoint_b else sys.b_matrix(y0)

    def g(y1):
        dy = y1 - y0
        avg = b @ sys.grad_h(y0 + c * dy)
        bm = sys.b_matrix(y0 + 0.5 * dy) if midpoint_b else b_const
        return y0 + (prefactor * h) * (bm @ avg)

    return iterate_fixed_point(g, y0, cfg)


def _epcm1(sys, y0, h, quad=None, cfg=DEFAULT_CONFIG) -> FixedPointOutcome:
    y0 = _check_state(sys, y0)
    rule = _rule(quad, make_polynomial_space(1), h, cfg)
    return _discrete_gradient_step(sys, y0, h, rule, cfg)


def _tfep1(sys, y0, h, omega, quad=None, cfg=DEFAULT_CONFIG) -> FixedPointOutcome:
    y0 = _check_state(sys, y0)
    rule = _rule(quad, make_polynomial_space(1), h, cfg)
    return _discrete_gradient_step(sys, y0, h, rule, cfg, prefactor=tfep1_prefactor(omega * h))


def _avf(sys, y0, h, quad=None, cfg=DEFAULT_CONFIG) -> FixedPointOutcome:
    y0 = _check_state(sys, y0)
    if not has_constant_b(sys, y0):
        raise InvalidMethodError(f"AVF needs a constant structure matrix; {sys.name} has a state-dependent B")
    rule = _rule(quad, make_polynomial_space(1), h, cfg)
    return _discrete_gradient_step(sys, y0, h, rule, cfg, midpoint_b=False)


def _ffep1(sys, y0, h, omega, quad=None, cfg=DEFAULT_CONFIG) -> FixedPointOutcome:
    y0 = _check_state(sys, y0)
    v = float(omega) * float(h)
    check_ffep1_frequency(v)
    rule = _rule(quad, make_trig_cos_space(omega), h, cfg)
    weight = half_sin_ratio(v)
    mid = 0.5 / math.cos(0.5 * v)
    frac = sine_fraction(v, rule.nodes)[:, None]
    kb = rule.weights * ffep1_kernel_at_midpoint(v, rule.nodes)

    def g(y1):
        dy = y1 - y0
        avg = kb @ sys.grad_h(y0 + frac * dy)
        return y0 + (weight * h) * (sys.b_matrix(y0 + mid * dy) @ avg)

    return iterate_fixed_point(g, y0, cfg)


def has_constant_b(sys: PoissonSystem, y0, seed: int = 0) -> bool:
    y0 = np.asarray(y0, dtype=float)
    rng = np.random.default_rng(seed)
    b0 = np.asarray(sys.b_matrix(y0))
    probes = y0 + (1.0 + np.max(np.abs(y0))) * rng.standard_normal((3, sys.dim))
    return bool(np.all(np.abs(np.asarray(sys.b_matrix(probes)) - b0) <= 1e-12 * (1.0 + np.max(np.abs(b0)))))


def epcm1_step(sys: PoissonSystem, y0, h: float, quad=None, cfg: SolverConfig = DEFAULT_CONFIG) -> np.ndarray:
    """Midpoint-B discrete-gradient step (r = 1 Legendre collocation).

    ``quad`` is a :class:`QuadratureRule`, a point count, or ``None`` for
    the default rule.
    """
    return _epcm1(sys, y0, h, quad, cfg).x


def ffep1_step(sys: PoissonSystem, y0, h: float, omega: float, quad=None, cfg: SolverConfig = DEFAULT_CONFIG) -> np.ndarray:
    """Cosine-fitted second-order step with ``v = omega h``."""
    return _ffep1(sys, y0, h, omega, quad, cfg).x


def tfep1_step(sys: PoissonSystem, y0, h: float, omega: float, quad=None, cfg: SolverConfig = DEFAULT_CONFIG) -> np.ndarray:
    return _tfep1(sys, y0, h, omega, quad, cfg).x


def avf_step(sys: PoissonSystem, y0, h: float, quad=None, cfg: SolverConfig = DEFAULT_CONFIG) -> np.ndarray:
    """Average vector field step; only for constant ``B``."""
    return _avf(sys, y0, h, quad, cfg).x


# ---------------------------------------------------------------------------
# presets
# ---------------------------------------------------------------------------

@dataclass(frozen=True)
class MethodPreset:
    """A named method: its fitting space, collocation nodes and frequency.

    ``omega`` is only meaningful for ``ffep1`` and ``tfep1``.
    """

    id: str
    r: int
    space_kind: str
    nodes: tuple
    omega: float = 0.0

    def space(self) -> FunctionSpaceSpec:
        if self.space_kind == "trig-cos":
            return make_trig_cos_space(self.omega)
        return make_polynomial_space(self.r)

    def generic_step_size(self, h: float) -> float:
        """Step size at which the generic integrator reproduces this preset.

        ``tfep1`` only rescales the step of ``epcm1`` by its prefactor.
        """
        if self.id == "tfep1":
            return h * tfep1_prefactor(self.omega * h)
        return h

    def plan(self, h: float, cfg: SolverConfig = DEFAULT_CONFIG) -> StepPlan:
        """Generic-integrator configuration equivalent to this preset."""
        return plan_step(self.space(), list(self.nodes), self.generic_step_size(h), cfg)

    def default_quad_points(self, h: float) -> int:
        return default_quad_points(self.space(), h)


def legendre_epcm_preset(r: int, quad=None) -> MethodPreset:
    """Polynomial space of dimension ``r`` with Gauss collocation nodes.

    ``quad`` is accepted for interface symmetry; the rule is chosen when the
    preset is planned.
    """
    if isinstance(r, bool) or not isinstance(r, (int, np.integer)) or not 1 <= r <= MAX_LEGENDRE_R:
        raise InvalidArgumentError(f"Legendre preset needs 1 <= r <= {MAX_LEGENDRE_R}, got {r!r}")
    return MethodPreset(f"legendre-{int(r)}", int(r), "polynomial", tuple(default_nodes(int(r)).tolist()))


def get_preset(method_id: str, omega: Optional[float] = None, r: Optional[int] = None) -> MethodPreset:
    """Look up a method by identifier.

    ``legendre`` with an explicit ``r`` is accepted as a synonym for
    ``legendre-<r>``.
    """
    if method_id == "legendre":
        return legendre_epcm_preset(1 if r is None else r)
    if method_id.startswith("legendre-"):
        try:
            rr = int(method_id.split("-", 1)[1])
        except ValueError:
            raise InvalidArgumentError(f"unknown method {method_id!r}") from None
        if r is not None and r != rr:
            raise InvalidArgumentError(f"method {method_id} conflicts with r={r}")
        return legendre_epcm_preset(rr)
    if method_id in ("avf", "epcm1"):
        return MethodPreset(method_id, 1, "polynomial", (0.5,))
    if method_id == "ffep1":
        return MethodPreset(method_id, 1, "trig-cos", (0.5,), 0.0 if omega is None else float(omega))
    if method_id == "tfep1":
        return MethodPreset(method_id, 1, "polynomial", (0.5,), 0.0 if omega is None else float(omega))
    raise InvalidArgumentError(f"unknown method {method_id!r}; choose from {', '.join(METHOD_IDS)}")


class Stepper:
    """One-step map ``y -> StepResult`` for a preset at fixed ``h``.

    Closed-form presets run their own iteration; Legendre presets go
    through the generic stage solver.
    """

    def __init__(self, preset: MethodPreset, sys: PoissonSystem, h: float, cfg: SolverConfig = DEFAULT_CONFIG):
        self.preset = preset
        self.sys = sys
        self.h = float(h)
        self.cfg = cfg
        self._plan = None
        pid = preset.id
        if pid.startswith("legendre-"):
            self._plan = preset.plan(self.h, cfg)
            self.rule = self._plan.rule
        else:
            self.rule = cfg.rule_for(preset.space(), self.h)
        if pid == "ffep1":
            check_ffep1_frequency(preset.omega * self.h)
            v = preset.omega * self.h
            self._x_scale = 1.0 / float(half_sin_ratio(v))
            self._mid = 0.5 / math.cos(0.5 * v)
        else:
            self._x_scale = 1.0
            self._mid = 0.5

    def __call__(self, y0) -> StepResult:
        if self._plan is not None:
            return fixed_point_step(self._plan, self.sys, y0, self.cfg)
        y0 = np.asarray(y0, dtype=float)
        pid, h, rule, cfg = self.preset.id, self.h, self.rule, self.cfg
        if pid == "epcm1":
            out = _epcm1(self.sys, y0, h, rule, cfg)
        elif pid == "avf":
            out = _avf(self.sys, y0, h, rule, cfg)
        elif pid == "ffep1":
            out = _ffep1(self.sys, y0, h, self.preset.omega, rule, cfg)
        else:
            out = _tfep1(self.sys, y0, h, self.preset.omega, rule, cfg)
        dy = out.x - y0
        X = (dy * self._x_scale)[None, :]
        stage = (y0 + self._mid * dy)[None, :]
        return StepResult(out.x, X, stage, out.iterations, out.residual, out.converged)


def make_stepper(method_id: str, sys: PoissonSystem, h: float, omega: Optional[float] = None, r: Optional[int] = None, cfg: SolverConfig = DEFAULT_CONFIG) -> Stepper:
    return Stepper(get_preset(method_id, omega=omega, r=r), sys, h, cfg)
