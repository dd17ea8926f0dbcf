"""Exception hierarchy shared by every gridrobust module."""


class GridRobustError(Exception):
    """Base class for all errors raised by gridrobust."""


class InvalidArgumentError(GridRobustError, ValueError):
    pass


class ConfigurationError(GridRobustError):
    pass


class SchemaError(GridRobustError):
    pass


class DataError(GridRobustError):
    """Malformed input data; ``line`` is the 1-based file line when known."""

    def __init__(self, message, line=None):
        self.line = line
        if line is not None:
            message = f"line {line}: {message}"
        super().__init__(message)


class ValidationError(DataError):
    def __init__(self, message, column=None, line=None):
        self.column = column
        super().__init__(message, line=line)


class FitError(GridRobustError):
    """A single model fit could not produce an estimate.

    ``code`` is the short machine-readable tag stored in sweep results.
    """

    code = "fit_error"


class EmptyDesignError(FitError):
    code = "empty_design"


class SingularDesignError(FitError):
    code = "singular_design"

    def __init__(self, message, column=None):
        self.column = column
        super().__init__(message)


class DegenerateResponseError(FitError):
    code = "degenerate_response"


class SeparationError(FitError):
    code = "separation"
