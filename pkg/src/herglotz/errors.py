"""Exception hierarchy shared by the integrator modules."""


class HerglotzError(Exception):
    """Base class for all errors raised by the package."""


class DimensionError(HerglotzError, ValueError):
    """Inputs of incompatible dimensions were combined."""


class NonFiniteStateError(HerglotzError, FloatingPointError):
    """A state with NaN or infinite entries was produced or supplied."""


class RegularityError(HerglotzError):
    """The velocity Hessian of a Lagrangian is singular at a queried state."""

    def __init__(self, message, state=None):
        super().__init__(message)
        self.state = state


class DegenerateStepError(HerglotzError):
    """The discrete conformal factor ``1 + D_z L_d`` vanishes (or nearly so)."""

    def __init__(self, message, state=None, sigma=None):
        super().__init__(message)
        self.state = state
        self.sigma = sigma


class ConvergenceError(HerglotzError):
    """Newton iteration failed to reach its tolerance.

    Attributes
    ----------
    iterate : ndarray
        Last Newton iterate.
    residual : ndarray
        Residual at ``iterate``.
    iterations : int
        Number of iterations performed.
    """

    def __init__(self, message, iterate=None, residual=None, iterations=0):
        super().__init__(message)
        self.iterate = iterate
        self.residual = residual
        self.iterations = iterations


class ShootingError(ConvergenceError):
    """The endpoint pair is outside the neighbourhood where shooting converges."""


class RolloutError(HerglotzError):
    """A step of a rollout failed; ``index`` is the failing step, ``partial`` the trajectory so far."""

    def __init__(self, message, index, partial=None, cause=None):
        super().__init__(message)
        self.index = index
        self.partial = partial
        self.cause = cause


class SymmetryError(HerglotzError):
    """A discrete Lagrangian is not invariant under the supplied generator."""


class ConfigError(HerglotzError, ValueError):
    """A scenario configuration document is invalid."""
