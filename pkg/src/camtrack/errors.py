"""Exception hierarchy.

Two families: :class:`InputError` for bad data or arguments (CLI exit 2) and
:class:`NumericalError` for failures inside a computation (CLI exit 3).
"""


class CamtrackError(Exception):
    """Base class for every error raised by this package."""


class InputError(CamtrackError, ValueError):
    pass


class NumericalError(CamtrackError, ArithmeticError):
    pass


# input / validation
class NonSymmetric(InputError):
    pass


class InvalidPhysical(InputError):
    pass


class InsufficientPoints(InputError):
    pass


class InconsistentB(NumericalError):
    pass


class ParseError(InputError):
    def __init__(self, message, line=None):
        self.line = line
        if line is not None:
            message = f"line {line}: {message}"
        super().__init__(message)


class ValidationError(InputError):
    def __init__(self, message, line=None):
        self.line = line
        if line is not None:
            message = f"line {line}: {message}"
        super().__init__(message)


class SchemaError(InputError):
    pass


class PointBehindCamera(InputError):
    def __init__(self, message, indices=()):
        self.indices = tuple(indices)
        super().__init__(message)


# numerical
class NoConvergence(NumericalError):
    pass


class RankDeficient(NumericalError):
    pass


class NonFiniteObjective(NumericalError):
    pass


class PointAtInfinity(NumericalError):
    pass


class DegenerateProjection(NumericalError):
    def __init__(self, message, index=None):
        self.index = index
        super().__init__(message)


class NearPiRotation(NumericalError):
    pass


class DegenerateConfiguration(NumericalError):
    pass


class SingularInput(NumericalError):
    pass


class SingularIntrinsics(NumericalError):
    pass


class SingularGeometry(NumericalError):
    pass


class SingularJacobian(NumericalError):
    pass
