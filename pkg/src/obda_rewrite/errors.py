"""Exception hierarchy shared by every module."""


class ObdaError(Exception):
    """Base class for all errors raised by this package."""


class ValidationError(ObdaError):
    pass


class ArityMismatch(ValidationError):
    pass


class ConstantInRule(ValidationError):
    pass


class TooManyTgdVariables(ValidationError):
    pass


class EmptyQuery(ValidationError):
    pass


class AnswerVarNotInBody(ValidationError):
    pass


class ParseError(ObdaError):
    """Syntax error carrying a 1-based (line, column) location."""

    def __init__(self, message, location=None):
        self.location = location
        if location is not None:
            message = f"{location.line}:{location.column}: {message}"
        super().__init__(message)


class UnknownVertex(ObdaError):
    pass


class DegreeMapInconsistent(ObdaError):
    pass


class TooManyTreeWitnesses(ObdaError):
    pass


class RewritingTooLarge(ObdaError):
    pass


class IncompatibleTreeWitnesses(ObdaError):
    pass


class NotTree(ObdaError):
    pass


class NotTreeWarning(UserWarning):
    pass


class NonMonotoneCircuit(ObdaError):
    pass


class NonMonotoneNBP(ObdaError):
    pass


class NotDepthOne(ObdaError):
    pass


class NameClash(UserWarning):
    pass


class AdviceTooLarge(ObdaError):
    pass


class UnboundVariable(ObdaError):
    pass


class DegreeTooHigh(ObdaError):
    pass


class UnnormalizedCircuit(ObdaError):
    pass


class NotDegreeTwo(ObdaError):
    pass


class MissingIncidence(ObdaError):
    pass


class LengthMismatch(ObdaError):
    pass


class BadParameters(ObdaError):
    pass


class UnmappedAtom(ObdaError):
    pass


class RecursionDetected(ObdaError):
    pass
