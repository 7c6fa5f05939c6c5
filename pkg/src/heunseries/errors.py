"""Exception hierarchy.

Input problems derive from :class:`ValueError`; numerical breakdowns derive
from :class:`ArithmeticError`. The CLI maps the two families to exit codes
2 and 3.
"""


class HeunError(Exception):
    """Base class for every error raised by this package."""


class ValidationError(HeunError, ValueError):
    pass


class NumericalError(HeunError, ArithmeticError):
    pass


class FuchsianViolation(ValidationError):
    pass


class SingularityCollision(ValidationError):
    pass


class PoleEvaluation(ValidationError):
    pass


class InvalidParameters(ValidationError):
    pass


class InvalidTermCount(ValidationError):
    pass


class DegenerateExponents(ValidationError):
    """Integer exponent difference, or a recurrence denominator that vanishes."""


class OutsideConvergenceDomain(ValidationError):
    pass


class CaseConditionViolation(ValidationError):
    pass


class NotAdmissible(ValidationError):
    pass


class PathThroughSingularity(ValidationError):
    pass


class NonintegrableEndpoint(ValidationError):
    pass


class NonconvergentSeries(NumericalError):
    pass


class ToleranceNotMet(NumericalError):
    pass


class TruncationWarning(UserWarning):
    """The last retained term of a truncated expansion is still significant."""
