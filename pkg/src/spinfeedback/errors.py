"""Exception types raised across the package."""


class SpinFeedbackError(ValueError):
    """Base class for all domain errors."""


class ConfigError(SpinFeedbackError):
    """Invalid or inconsistent run configuration.

    ``field`` names the offending config key when known.
    """

    def __init__(self, message, field=None):
        super().__init__(message)
        self.field = field


class ClampNotGaussian(SpinFeedbackError):
    """Covariance propagation was asked to apply the non-Gaussian clamp."""


class DegenerateChannel(SpinFeedbackError):
    """Channel with zero coupling; feedback has no handle on the outcome."""


class InsufficientData(SpinFeedbackError):
    pass


class DegenerateColumn(SpinFeedbackError):
    pass


class NoAtomSignal(SpinFeedbackError):
    """Excess-over-shot-noise denominator is not positive."""


class InvalidJ(SpinFeedbackError):
    pass


class InvalidProjection(SpinFeedbackError):
    pass


class SizeExceeded(SpinFeedbackError):
    pass
