"""Exception hierarchy.

Two families matter to callers: :class:`ValidationError` for bad inputs or
violated preconditions, and :class:`NumericalError` for failures that happen
while computing.  The command-line front end maps them to exit codes 2 and 3.
"""

from __future__ import annotations


class PWHSError(Exception):
    """Base class for every error raised by this package."""


class ValidationError(PWHSError, ValueError):
    """Inputs are malformed or a documented precondition does not hold."""


class NumericalError(PWHSError, ArithmeticError):
    """A computation could not be completed numerically."""


class IoFailure(PWHSError, OSError):
    """Reading or writing an artifact failed."""


# validation family
class InvalidFieldSpec(ValidationError):
    pass


class UnsupportedVariant(ValidationError):
    pass


class PreconditionViolation(ValidationError):
    pass


class NotInSlidingRegion(PreconditionViolation):
    pass


class StartAtDoubleTangency(PreconditionViolation):
    pass


class DegenerateParameters(ValidationError):
    pass


class ConditionViolated(ValidationError):
    pass


class TableRowMismatch(ValidationError):
    pass


class ScenarioError(ValidationError):
    pass


# numerical family
class EvaluationAtSingularity(NumericalError):
    pass


class StencilHitsSingularity(NumericalError):
    pass


class DegenerateDenominator(NumericalError):
    pass


class MultiplicityExceedsKMax(NumericalError):
    pass


class OrbitUnboundedAtAngle(NumericalError):
    pass


class StepSizeUnderflow(NumericalError):
    pass


class IntegrationFailure(NumericalError):
    pass


class NoReturn(IntegrationFailure):
    pass


class HitSingularity(IntegrationFailure):
    pass


class NoSignChange(NumericalError):
    pass


class NoCriticalPoint(NumericalError):
    pass


class NoAdmissibleCycle(NumericalError):
    pass
