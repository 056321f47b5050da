"""Exception hierarchy.

Every error carries an ``exit_code`` used by the command-line frontend:
1 for bad input (format, shape, missing files), 2 for numerical failures.
"""


class SenseMapError(Exception):
    exit_code = 2


class ValidationError(SenseMapError, ValueError):
    exit_code = 1


class FormatError(ValidationError):
    def __init__(self, message, path=None, line=None):
        self.path = path
        self.line = line
        where = ""
        if path is not None:
            where = f"{path}"
            if line is not None:
                where += f":{line}"
            where += ": "
        super().__init__(where + message)


class DimensionMismatch(ValidationError):
    pass


class LengthMismatch(ValidationError):
    pass


class IndexOutOfRange(ValidationError):
    pass


class VersionMismatch(ValidationError):
    pass


class MissingLabel(ValidationError):
    pass


class EmptyCollection(ValidationError):
    pass


class InsufficientVectors(ValidationError):
    pass


class TooFewVectors(ValidationError):
    pass


class CurveTooShort(ValidationError):
    pass


class DegenerateVector(SenseMapError):
    pass


class SvdFailure(SenseMapError):
    pass


class InsufficientAnchors(UserWarning):
    """Fewer anchors than dimensions: the map is underdetermined."""
