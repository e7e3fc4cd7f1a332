"""Exception and warning types shared across the package."""


class OptoCoherenceError(Exception):
    """Base class for all errors raised by this package."""


class PhysicalityError(OptoCoherenceError, ValueError):
    """A covariance matrix or occupation violates the uncertainty bound."""


class StabilityError(OptoCoherenceError):
    """The linearized dynamics are not asymptotically stable.

    ``margins`` carries the two Routh-Hurwitz values when they are known.
    """

    def __init__(self, message, margins=None, abscissa=None):
        super().__init__(message)
        self.margins = margins
        self.abscissa = abscissa


class MarginalStabilityError(StabilityError):
    """A Routh-Hurwitz margin lies inside the marginal band."""


class NumericalError(OptoCoherenceError, ArithmeticError):
    pass


class ConvergenceError(NumericalError):
    def __init__(self, message, derivative_norm=None):
        super().__init__(message)
        self.derivative_norm = derivative_norm


class ConfigError(OptoCoherenceError, ValueError):
    """Invalid or unknown configuration key. ``key`` names the offender."""

    def __init__(self, message, key=None):
        super().__init__(message)
        self.key = key


class InconsistentMeasurementError(OptoCoherenceError, ValueError):
    """Output statistics fall below the vacuum floor of the readout."""


class MultistabilityWarning(UserWarning):
    pass


class ValidityWarning(UserWarning):
    """An approximation's ratio threshold is violated."""
