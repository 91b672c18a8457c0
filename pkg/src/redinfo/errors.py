"""Exception hierarchy.

Everything raised for bad input derives from ValidationError so callers (the
CLI in particular) can map a whole family of problems to one exit code.
"""


class RedinfoError(Exception):
    pass


class ValidationError(RedinfoError, ValueError):
    pass


class NegativeMass(ValidationError):
    pass


class ZeroTotal(ValidationError):
    pass


class NotNormalized(ValidationError):
    pass


class RowNotNormalized(ValidationError):
    pass


class DimensionMismatch(ValidationError):
    pass


class ParamOutOfRange(ValidationError):
    pass


class UnknownExample(ValidationError):
    pass


class AbsoluteContinuityViolation(ValidationError):
    pass


class ZeroProbabilityOutcome(ValidationError):
    pass


class TooManyConditioners(ValidationError):
    pass


class InfeasibleSupport(RedinfoError):
    pass


class NonConvergence(RedinfoError):
    pass


class ConsistencyError(RedinfoError, ArithmeticError):
    """A quantity that is provably non-negative came out clearly negative."""
