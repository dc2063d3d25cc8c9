"""Exception hierarchy.

Two families: ``ValidationError`` for bad inputs (CLI exit code 2) and
``NumericalError`` for failures of a numerical procedure on valid inputs
(CLI exit code 3).
"""


class IdentError(Exception):
    """Base class for every error raised by this package."""


class ValidationError(IdentError, ValueError):
    pass


class NumericalError(IdentError, ArithmeticError):
    pass


# -- validation --------------------------------------------------------------

class InvalidParameter(ValidationError):
    pass


class InvalidDomain(ValidationError):
    pass


class InvalidSigma(ValidationError):
    pass


class DegenerateOperator(ValidationError):
    pass


class OutOfDomain(ValidationError):
    pass


class SamePoint(ValidationError):
    pass


class InvalidScale(ValidationError):
    pass


class BasisMismatch(ValidationError):
    pass


class GridMismatch(ValidationError):
    pass


class NonCommuting(ValidationError):
    pass


class NonSingular(ValidationError):
    pass


class TrivialCommutant(ValidationError):
    pass


class ConfigError(ValidationError):
    pass


# -- numerical ---------------------------------------------------------------

class UnsupportedDrift(NumericalError):
    pass


class RootScanExhausted(NumericalError):
    pass


class NotConstructible(NumericalError):
    pass


class StepSizeRejected(NumericalError):
    pass


class BlowUp(NumericalError):
    pass


class IntegratorBlowUp(NumericalError):
    pass


class RangeTooNarrow(NumericalError):
    pass


class CholeskyFailure(NumericalError):
    pass
