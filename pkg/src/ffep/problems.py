"""Benchmark Poisson systems and their reference solutions.

The rigid-body (Euler) equations are written as a Poisson system with
``H(y) = |y|^2 / 2``.  For the first parameter set the exact solution is
``(sqrt(1.51) sn(t|m), cn(t|m), dn(t|m))`` with parameter ``m = 0.51``,
evaluated here through the arithmetic-geometric mean.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from typing import Callable, Optional

import numpy as np

from .exceptions import InvalidArgumentError, NoExactSolutionError
from .integrator import PoissonSystem

AGM_MAX_ITER = 40
AGM_RTOL = 1e-15

ELLIPTIC_M = 0.51
EULER_PERIOD = 7.450563209330954


@dataclass(frozen=True)
class EulerParams:
    alpha: float
    beta: float

    def __post_init__(self):
        if not (math.isfinite(self.alpha) and math.isfinite(self.beta)):
            raise InvalidArgumentError(f"Euler parameters must be finite, got {self}")


EULER_A = EulerParams(1.0 + 1.0 / math.sqrt(1.51), 1.0 - 0.51 / math.sqrt(1.51))
EULER_B = EulerParams(51.0, 1.01)


def _sq_norm_half(y):
    y = np.asarray(y, dtype=float)
    return 0.5 * np.sum(y * y, axis=-1)


def _identity_grad(y):
    return np.asarray(y, dtype=float)


def euler_system(p: EulerParams = EULER_A) -> PoissonSystem:
    """Free rigid body in the Poisson form used for the benchmark.

    The (3, 2) entry of ``B`` is ``-y1`` so that ``B`` is skew and
    ``B(y) y`` reproduces the component form
    ``((a-b) y2 y3, (1-a) y3 y1, (b-1) y1 y2)``.
    """
    a, b = p.alpha, p.beta

    def b_matrix(y):
        y = np.asarray(y, dtype=float)
        y1, y2, y3 = y[..., 0], y[..., 1], y[..., 2]
        out = np.zeros(y.shape[:-1] + (3, 3))
        out[..., 0, 1] = a * y3
        out[..., 0, 2] = -b * y2
        out[..., 1, 0] = -a * y3
        out[..., 1, 2] = y1
        out[..., 2, 0] = b * y2
        out[..., 2, 1] = -y1
        return out

    return PoissonSystem(3, b_matrix, _identity_grad, _sq_norm_half, name=f"euler(alpha={a:g}, beta={b:g})")


def euler_vector_field(p: EulerParams, y):
    """Component form of the rigid-body equations."""
    y = np.asarray(y, dtype=float)
    y1, y2, y3 = y[..., 0], y[..., 1], y[..., 2]
    return np.stack(
        [(p.alpha - p.beta) * y2 * y3, (1.0 - p.alpha) * y3 * y1, (p.beta - 1.0) * y1 * y2], axis=-1
    )


_J2 = np.array([[0.0, 1.0], [-1.0, 0.0]])


def harmonic_oscillator_system() -> PoissonSystem:
    def b_matrix(y):
        y = np.asarray(y, dtype=float)
        return np.broadcast_to(_J2, y.shape[:-1] + (2, 2))

    return PoissonSystem(2, b_matrix, _identity_grad, _sq_norm_half, name="harmonic")


def harmonic_exact(t, y0=(1.0, 0.0)):
    """Exact flow of ``q' = p, p' = -q``: a clockwise rotation of ``y0``."""
    t = np.asarray(t, dtype=float)
    q0, p0 = y0
    c, s = np.cos(t), np.sin(t)
    return np.stack([c * q0 + s * p0, -s * q0 + c * p0], axis=-1)


# ---------------------------------------------------------------------------
# elliptic functions
# ---------------------------------------------------------------------------

def _check_parameter(m):
    m = float(m)
    if not (0.0 <= m < 1.0):
        raise InvalidArgumentError(f"elliptic parameter must lie in [0, 1), got {m}")
    return m


def complete_elliptic_K(m: float) -> float:
    """Complete elliptic integral of the first kind, ``K(m) = pi / (2 AGM(1, sqrt(1-m)))``."""
    m = _check_parameter(m)
    a, b = 1.0, math.sqrt(1.0 - m)
    for _ in range(AGM_MAX_ITER):
        if abs(a - b) <= AGM_RTOL * a:
            break
        a, b = 0.5 * (a + b), math.sqrt(a * b)
    return math.pi / (a + b)


@dataclass(frozen=True)
class EllipticState:
    sn: np.ndarray
    cn: np.ndarray
    dn: np.ndarray
    m: float


def jacobi_sn_cn_dn(u, m: float) -> EllipticState:
    """Jacobi elliptic functions by descending Landen transformation.

    Forward AGM sweep to build ``a_n, c_n``, then backward recovery of the
    amplitude ``phi_{n-1} = (phi_n + asin(c_n sin(phi_n) / a_n)) / 2``;
    ``sn = sin(phi_0)``, ``cn = cos(phi_0)``.  Works elementwise on arrays.
    """
    m = _check_parameter(m)
    u = np.asarray(u, dtype=float)
    if m == 0.0:
        return EllipticState(np.sin(u), np.cos(u), np.ones_like(u), m)

    a_seq = [1.0]
    c_seq = [math.sqrt(m)]
    a, b = 1.0, math.sqrt(1.0 - m)
    for _ in range(AGM_MAX_ITER):
        c = 0.5 * (a - b)
        a, b = 0.5 * (a + b), math.sqrt(a * b)
        a_seq.append(a)
        c_seq.append(c)
        if abs(c) <= AGM_RTOL * a:
            break
    n = len(a_seq) - 1

    phi = (2.0**n) * a_seq[n] * u
    for k in range(n, 0, -1):
        phi = 0.5 * (phi + np.arcsin(c_seq[k] * np.sin(phi) / a_seq[k]))
    sn = np.sin(phi)
    cn = np.cos(phi)
    # dn > 0 for real u and 0 <= m < 1; the textbook cn / cos(phi_1 - phi_0)
    # is 0/0 at odd multiples of K
    dn = np.sqrt(1.0 - m * sn * sn)
    return EllipticState(sn, cn, dn, m)


def euler_exact(t, p: EulerParams = EULER_A):
    """Exact rigid-body solution from ``y(0) = (0, 1, 1)``.

    Only the first parameter set has this closed form.
    """
    if not (math.isclose(p.alpha, EULER_A.alpha, rel_tol=1e-15) and math.isclose(p.beta, EULER_A.beta, rel_tol=1e-15)):
        raise NoExactSolutionError(f"no closed-form solution for {p}")
    st = jacobi_sn_cn_dn(t, ELLIPTIC_M)
    return np.stack([math.sqrt(1.51) * st.sn, st.cn, st.dn], axis=-1)


# ---------------------------------------------------------------------------
# registry
# ---------------------------------------------------------------------------

@dataclass(frozen=True)
class Problem:
    """A named benchmark: system, initial value and optional exact flow."""

    id: str
    system: PoissonSystem
    y0: np.ndarray
    omega: float
    exact: Optional[Callable[[float], np.ndarray]] = None
    description: str = ""


def _make_problem(pid: str) -> Problem:
    if pid == "euler-a":
        p = Problem(
            pid,
            euler_system(EULER_A),
            np.array([0.0, 1.0, 1.0]),
            2.0 * math.pi / EULER_PERIOD,
            lambda t: euler_exact(t, EULER_A),
            "rigid body, alpha=1+1/sqrt(1.51), beta=1-0.51/sqrt(1.51); exact Jacobi-elliptic reference",
        )
    elif pid == "euler-b":
        p = Problem(
            pid,
            euler_system(EULER_B),
            np.array([0.0, 1.0, 1.0]),
            50.0,
            None,
            "rigid body, alpha=51, beta=1.01; no closed-form reference",
        )
    elif pid == "harmonic":
        p = Problem(
            pid,
            harmonic_oscillator_system(),
            np.array([1.0, 0.0]),
            1.0,
            lambda t: harmonic_exact(t, (1.0, 0.0)),
            "harmonic oscillator, H=(q^2+p^2)/2; exact rotation reference",
        )
    else:
        raise InvalidArgumentError(f"unknown problem {pid!r}; choose from {', '.join(PROBLEM_IDS)}")
    p.system.validate(p.y0)
    return p


PROBLEM_IDS = ("euler-a", "euler-b", "harmonic")


def get_problem(pid: str) -> Problem:
    return _make_problem(pid)
