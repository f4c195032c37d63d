"""Exception types shared across the library."""


class MildLabError(Exception):
    """Base class for all library-specific failures."""


class NumericalOverflowError(MildLabError):
    """A semigroup action produced non-finite values."""


class IllConditionedResolventError(MildLabError):
    """The resolvent system is singular or too ill-conditioned to trust."""


class NoLimitError(MildLabError):
    """The semigroup shows no sign of stabilising at the probed horizons."""


class NoConvergenceError(MildLabError):
    """Fixed-point iteration exhausted its budget."""

    def __init__(self, message, defect=None):
        super().__init__(message)
        self.defect = defect


class ContractionViolatedError(MildLabError):
    """The exponential weight is too small for the declared Lipschitz data."""


class SweepError(MildLabError):
    """A sweep point failed; carries the offending parameter value."""

    def __init__(self, message, param=None):
        super().__init__(message)
        self.param = param


class ConfigError(MildLabError):
    """An experiment configuration is malformed; carries the field path."""

    def __init__(self, message, field=None):
        super().__init__(message)
        self.field = field
