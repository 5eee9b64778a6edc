"""Exception types shared across the lab modules."""


class NegCurvError(Exception):
    """Base class for every error raised by this package."""


class DomainError(NegCurvError, ValueError):
    """An argument lies outside the domain of the function it is passed to."""


class SingularityError(NegCurvError, ArithmeticError):
    """A formula divides by a quantity that vanishes at the requested point."""


class QuadratureError(NegCurvError, ArithmeticError):
    """Adaptive quadrature could not reach its tolerance."""


class NotPositiveDefinite(NegCurvError, ValueError):
    def __init__(self, message, eigenvalue=None):
        super().__init__(message)
        self.eigenvalue = eigenvalue


class ZeroVector(NegCurvError, ValueError):
    pass


class DegeneratePlane(NegCurvError, ValueError):
    pass


class DomainExited(NegCurvError):
    """A geodesic left the region where its metric is defined.

    The partial path up to the exit is kept on ``path`` and the time of the
    last valid sample on ``exit_time``.
    """

    def __init__(self, message, exit_time, path=None):
        super().__init__(message)
        self.exit_time = exit_time
        self.path = path


class StepTooLarge(NegCurvError):
    def __init__(self, message, drift):
        super().__init__(message)
        self.drift = drift


class NoConvergence(NegCurvError):
    def __init__(self, message, best_length=None, residual=None):
        super().__init__(message)
        self.best_length = best_length
        self.residual = residual


class NotAGeodesic(NegCurvError):
    def __init__(self, message, max_error):
        super().__init__(message)
        self.max_error = max_error
