"""Exception types shared across the package."""


class SqfreezeError(Exception):
    """Base class for all errors raised by this package."""


class ValidationError(SqfreezeError, ValueError):
    """Structurally invalid model, assignment, directive, or config."""


class AssignmentMismatchError(ValidationError):
    """An assignment's label set does not match the model being evaluated."""


class ProblemFormatError(ValidationError):
    """A problem/sample/report file could not be parsed or failed validation."""


class SizeLimitError(SqfreezeError):
    """Requested operation exceeds a hard size guard (enumeration or dense matrices)."""


class EmptyConditionError(SqfreezeError):
    """A conditional statistic was requested over an empty shot subset."""
