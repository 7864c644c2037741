"""Exception hierarchy.

Numerical failures derive from :class:`NumericalError`; the CLI maps those to
exit code 1 and everything that is a bad request to exit code 2.
"""


class FFEPError(Exception):
    """Base class for all errors raised by this package."""


class InvalidArgumentError(FFEPError, ValueError):
    """An argument is outside the documented domain."""


class InvalidFrequencyError(InvalidArgumentError):
    """A fitted frequency puts a scheme coefficient on a singularity."""


class InvalidMethodError(InvalidArgumentError):
    """The method cannot be applied to the given system."""


class NoExactSolutionError(InvalidArgumentError):
    """No closed-form reference exists for the requested parameters."""


class NumericalError(FFEPError, ArithmeticError):
    """Base class for failures of the numerics themselves."""


class SingularMatrixError(NumericalError):
    """A dense matrix is numerically singular."""


class DegenerateBasisError(NumericalError):
    """The fitting basis is (numerically) linearly dependent."""


class SingularInterpolationError(NumericalError):
    """The node-evaluation matrix of a Lagrange basis is singular."""


class DivergenceError(NumericalError):
    """A non-finite state appeared during the stage iteration.

    ``partial`` holds the trajectory accumulated before the failure when the
    error is raised from a multi-step run.
    """

    def __init__(self, message, partial=None):
        super().__init__(message)
        self.partial = partial


class NonConvergenceError(NumericalError):
    """Fixed-point iteration hit its budget without meeting the tolerance."""

    def __init__(self, message, residual=float("nan"), iterations=0):
        super().__init__(message)
        self.residual = residual
        self.iterations = iterations


class InsufficientDataError(NumericalError):
    """Too few usable samples to fit a convergence order."""
