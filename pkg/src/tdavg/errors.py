class TdavgError(Exception):
    """Base class for all errors raised by tdavg."""


class EvaluationError(TdavgError):
    """A vector field returned a non-finite value."""


class AdmissibilityError(TdavgError, ValueError):
    """A state lies outside a model's admissible region."""


class OutOfRangeError(TdavgError, ValueError):
    """A time or target value lies outside the range covered by a trajectory."""


class IntegrationError(TdavgError):
    """Numerical integration failed.

    ``reason`` is one of ``"max_steps"``, ``"step_underflow"``, ``"nonfinite"``;
    ``partial`` holds the trajectory computed up to the failure.
    """

    def __init__(self, reason, message, partial=None):
        super().__init__(message)
        self.reason = reason
        self.partial = partial


class HypothesisViolation(TdavgError):
    """The model violates an assumption of the averaging theorem (H > 0, H decreasing)."""


class QuadratureError(TdavgError):
    """Period average did not converge under node doubling."""


class DegenerateDataError(TdavgError, ValueError):
    """Input data cannot support the requested fit or estimate."""


class ConfigError(TdavgError, ValueError):
    """Invalid experiment configuration."""
