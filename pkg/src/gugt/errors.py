"""Exception hierarchy.

``DataError`` subclasses describe problems with input data (CLI exit code 1);
``ConfigError`` subclasses describe bad parameters (CLI exit code 2).
"""


class GugtError(Exception):
    """Base class for all package errors."""


class DataError(GugtError):
    pass


class ConfigError(GugtError, ValueError):
    pass


class MalformedRecord(DataError):
    def __init__(self, line: int, reason: str):
        self.line = line
        self.reason = reason
        super().__init__(f"line {line}: {reason}")


class NonMonotonicTimestamp(DataError):
    pass


class WrongJointCount(DataError):
    pass


class EmptySession(DataError):
    pass


class InsufficientTracking(DataError):
    pass


class DegenerateRange(DataError):
    pass


class NoRecovery(DataError):
    pass


class NoSteps(DataError):
    pass


class ZeroVector(DataError):
    pass


class TooFewPoints(DataError):
    pass


class TooFewDistinctPoints(DataError):
    pass


class EmptyStream(DataError):
    pass


class DimensionMismatch(DataError):
    pass


class EmptyTrainingSet(DataError):
    pass


class SingleClassTraining(DataError):
    pass


class TooFewSubjects(DataError):
    pass


class FoldError(DataError):
    def __init__(self, subject: str, cause: Exception):
        self.subject = subject
        self.cause = cause
        super().__init__(f"fold {subject!r}: {type(cause).__name__}: {cause}")


class InvalidProfile(ConfigError):
    pass


class InvalidParameter(ConfigError):
    pass


class NonConvergence(UserWarning):
    """Emitted when the SVM solver stops on its iteration budget."""
