"""Exception and warning types raised across the package."""


class TangentFieldsError(Exception):
    """Base class for all package errors."""


class DomainError(TangentFieldsError, ValueError):
    """An argument lies outside the domain of the operation."""


class SingularityError(TangentFieldsError, ValueError):
    """Evaluation requested at (or numerically on top of) a singular point."""


class ConvergenceError(TangentFieldsError, RuntimeError):
    """An iterative construction failed to certify its tolerance."""

    def __init__(self, message, diagnostics=None):
        super().__init__(message)
        self.diagnostics = dict(diagnostics or {})


class SolverError(TangentFieldsError, RuntimeError):
    """A dense linear solve was singular or too ill-conditioned."""

    def __init__(self, message, condition=None):
        super().__init__(message)
        self.condition = condition


class AccuracyError(TangentFieldsError, RuntimeError):
    """A quadrature refinement did not settle within its tolerance."""


class UndefinedCoefficientError(TangentFieldsError, ValueError):
    """The volume-normalized coefficient is undefined because the incident
    field integrates to zero over the inclusions; use the frequency part of
    the potential-difference decomposition directly."""


class ConfigError(TangentFieldsError, ValueError):
    """Invalid run configuration."""


class NearSingularWarning(UserWarning):
    """Quadrature accuracy may be degraded by a nearby surface."""


class QuasiStaticWarning(UserWarning):
    """The frequency is outside the quasi-static regime (omega * r not small)."""
