"""Exception types raised by the solver pipeline."""


class HomoclinicError(Exception):
    """Base class for all library errors."""


class InstanceEvaluationError(HomoclinicError):
    """A problem function returned a non-finite value."""

    def __init__(self, what, point, value):
        self.what = what
        self.point = point
        self.value = value
        super().__init__(
            f"instance evaluation error: {what}({point!r}) = {value!r}")


class TruncationInsufficient(HomoclinicError):
    pass


class AntiderivativeFailure(HomoclinicError):
    pass


class QuadratureOrderInsufficient(HomoclinicError):
    pass


class CertificateError(HomoclinicError):
    """Raised when no certified k exists (lambda too large)."""


class WeightVanishes(HomoclinicError):
    pass


class ThresholdUndefined(HomoclinicError):
    pass


class AssemblyFailure(HomoclinicError):
    pass


class HypothesisBreach(HomoclinicError):
    pass


class SolverExhausted(HomoclinicError):
    pass


class ContinuationStalled(HomoclinicError):
    def __init__(self, message, drift=None):
        self.drift = list(drift or [])
        super().__init__(message)


class NoHomoclinic(HomoclinicError):
    def __init__(self, message, levels=None, reason=""):
        self.levels = list(levels or [])
        self.reason = reason
        super().__init__(message)


class AsymptoticBoundBreach(HomoclinicError):
    pass


class ConfigError(HomoclinicError):
    pass
