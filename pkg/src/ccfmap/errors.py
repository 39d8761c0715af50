"""Exception hierarchy shared across the package.

DataError covers everything caused by bad inputs (files, CSV rows, model
documents, imbalanced training sets); the CLI maps it to exit code 2.
Anything else escaping to the CLI is an internal error (exit code 1).
"""


class DataError(Exception):
    """Invalid or inconsistent user-supplied data."""


class LoadError(DataError):
    """A file could not be read or failed validation."""


class ParseError(DataError):
    """A structured document is malformed.

    Carries enough context (line number, field) to locate the problem.
    """

    def __init__(self, message, line=None, field=None):
        ctx = []
        if line is not None:
            ctx.append(f"line {line}")
        if field is not None:
            ctx.append(f"field '{field}'")
        if ctx:
            message = f"{message} ({', '.join(ctx)})"
        super().__init__(message)
        self.line = line
        self.field = field


class UnsupportedVersionError(DataError):
    """A model document declares a format version we do not understand."""


class ImbalanceError(DataError):
    """A class has too few samples to build a balanced training set."""


class DegenerateInputError(ValueError):
    """Too few rows for a covariance-based solve; callers fall back."""
