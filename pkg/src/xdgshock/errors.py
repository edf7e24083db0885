"""Exception hierarchy shared by the solver modules."""


class XdgShockError(Exception):
    """Base class for all solver errors."""


class InvalidStateError(XdgShockError, ValueError):
    """A thermodynamic state has non-positive density or pressure."""

    def __init__(self, message, component=None, cell=None):
        super().__init__(message)
        self.component = component
        self.cell = cell


class ShockDomainError(XdgShockError, ValueError):
    """Shock Mach number below one (expansion shock)."""


class VacuumError(XdgShockError):
    """Riemann data generates vacuum."""


class ConvergenceError(XdgShockError):
    """An iterative method hit its iteration cap."""

    def __init__(self, message, residual=None):
        super().__init__(message)
        self.residual = residual


class ConfigurationError(XdgShockError, ValueError):
    """Invalid grid, solver or run configuration."""


class AssemblyError(XdgShockError):
    """Mass matrix or projection could not be formed."""


class ResidualError(XdgShockError):
    """The spatial residual could not be evaluated."""

    def __init__(self, message, cell=None):
        super().__init__(message)
        self.cell = cell


class JacobianError(XdgShockError):
    """Residual evaluation failed at a perturbed state."""

    def __init__(self, message, dof=None):
        super().__init__(message)
        self.dof = dof


class LinearSolveError(XdgShockError):
    """The Newton matrix is singular."""


class IndicatorError(XdgShockError):
    """An interface indicator cannot be evaluated."""


class PlacementError(XdgShockError):
    """A cut-cell volume fraction fell below the agglomeration threshold.

    ``trace`` holds the pseudo-steps completed before the violation.
    """

    def __init__(self, message: str, trace=None):
        super().__init__(message)
        self.trace = trace
