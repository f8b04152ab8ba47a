"""Exception types shared across the package.

ConfigError maps to CLI exit code 2, NumericsError (and subclasses) to
exit code 3.  Everything else is a plain bug and propagates as-is.
"""


class ConfigError(ValueError):
    """Invalid or inconsistent run configuration."""


class NumericsError(RuntimeError):
    """A numerical routine failed to reach its accuracy target."""


class QuadratureError(NumericsError):
    """Adaptive quadrature did not converge.

    Carries the integration diagnostics so the caller can report which
    integral (and at which time/parameter point) went bad.
    """

    def __init__(self, message, *, where=None, abserr=None):
        super().__init__(message)
        self.where = where
        self.abserr = abserr


class ConvergenceError(NumericsError):
    """An iterative estimate (asymptote, refinement, ODE step) stalled."""


class TruncationError(NumericsError):
    """A finite time horizon cut into structure that has not decayed.

    ``suggested_horizon`` is a crude estimate of how far the horizon
    would need to move for the truncated quantity to settle.
    """

    def __init__(self, message, *, suggested_horizon=None):
        super().__init__(message)
        self.suggested_horizon = suggested_horizon


class InstabilityError(NumericsError):
    """The coupled system+bath Hamiltonian is not positive definite.

    Raised when the star-Hamiltonian potential matrix has a
    non-positive eigenvalue, i.e. the renormalized system potential is
    inverted for the requested coupling/cutoff.
    """

    def __init__(self, message, *, coupling=None, cutoff=None, n_modes=None):
        super().__init__(message)
        self.coupling = coupling
        self.cutoff = cutoff
        self.n_modes = n_modes


class BracketError(NumericsError):
    """A root bracket assumed by a bisection search does not hold."""
