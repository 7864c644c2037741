"""Functionally-fitted energy-preserving integrators for Poisson systems."""

from .exceptions import (
    DegenerateBasisError,
    DivergenceError,
    FFEPError,
    InsufficientDataError,
    InvalidArgumentError,
    InvalidFrequencyError,
    InvalidMethodError,
    NoExactSolutionError,
    NonConvergenceError,
    NumericalError,
    SingularInterpolationError,
    SingularMatrixError,
)
from .integrator import (
    PoissonSystem,
    SolverConfig,
    StepPlan,
    StepResult,
    Trajectory,
    dense_eval,
    fixed_point_step,
    integrate,
    march,
    plan_step,
)
from .methods import (
    MethodPreset,
    avf_step,
    epcm1_step,
    ffep1_step,
    get_preset,
    legendre_epcm_preset,
    make_stepper,
    tfep1_step,
)
from .numeric import QuadratureRule, gauss_legendre_rule, invert_dense, solve_dense
from .problems import (
    EULER_A,
    EULER_B,
    EULER_PERIOD,
    EulerParams,
    complete_elliptic_K,
    euler_exact,
    euler_system,
    get_problem,
    harmonic_oscillator_system,
    jacobi_sn_cn_dn,
)
from .spaces import (
    lagrange_basis,
    lagrange_integral,
    make_custom_space,
    make_polynomial_space,
    make_trig_cos_space,
    orthonormalize,
    projection_kernel,
    scale_basis,
    shifted_legendre,
)

__version__ = "0.1.0"
