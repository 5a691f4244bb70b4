"""Exception hierarchy.

Every numeric failure derives from :class:`NumericError` so that batch
front-ends can map it to a single exit status; configuration problems
derive from :class:`ConfigError`.
"""


class LinstatError(Exception):
    """Base class for all library errors."""


class NumericError(LinstatError):
    """A computation could not be carried out or did not meet its contract."""


class DomainError(NumericError, ValueError):
    """An argument lies outside the domain of the operation."""


class InvalidPotentialError(DomainError):
    pass


class MergedSupportError(DomainError):
    """Parameters left the two-band regime."""


class InconsistentSupportError(NumericError):
    """The density assembled for a candidate support is negative somewhere."""


class UnsupportedError(NumericError):
    pass


class ConvergenceError(NumericError):
    def __init__(self, message, last_residual=float("nan")):
        super().__init__(f"{message} (last residual {last_residual:.3e})")
        self.last_residual = last_residual


class PrecisionError(NumericError):
    def __init__(self, message, degree):
        super().__init__(f"{message} at degree {degree}")
        self.degree = degree


class TruncationError(NumericError):
    pass


class RangeError(NumericError):
    pass


class ConstructionError(NumericError):
    pass


class DivergenceError(NumericError):
    pass


class ConditioningError(NumericError):
    pass


class EdgeRegimeError(DomainError):
    pass


class StepSizeError(NumericError):
    pass


class SizeError(NumericError):
    pass


class ConfigError(LinstatError):
    """Carries a list of ``(field_path, message)`` pairs."""

    def __init__(self, errors):
        self.errors = list(errors)
        text = "; ".join(f"{p}: {m}" for p, m in self.errors)
        super().__init__(text or "invalid configuration")
