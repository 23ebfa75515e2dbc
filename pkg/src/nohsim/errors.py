"""Exception types shared across the package."""


class ParameterError(ValueError):
    """Invalid model, generator or experiment parameter."""


class EdgeListParseError(ValueError):
    """Malformed or empty edge-list file."""

    def __init__(self, message, lineno=None):
        if lineno is not None:
            message = f"line {lineno}: {message}"
        super().__init__(message)
        self.lineno = lineno


class OrderingError(ValueError):
    """Attempt to move a simulation clock backwards."""


class CapacityError(ValueError):
    """Requested object is too large to materialize."""


class UndefinedStatisticError(ValueError):
    """Statistic is undefined for the given sample (e.g. zero variance)."""
