"""Exception types shared across the package.

ValidationError and its subclasses map to CLI exit code 2, NumericalError
to exit code 3.
"""


class ValidationError(ValueError):
    """Invalid input: bad values, malformed files, broken invariants."""


class ShapeError(ValidationError):
    """Operand shapes are incompatible for the requested operation."""


class ContractError(ValidationError):
    """An operation was called in a state that violates its contract."""


class ConfigurationError(ValidationError):
    """A component is configured inconsistently with the data it is applied to."""


class ParseError(ValidationError):
    """A serialized graph file could not be parsed."""

    def __init__(self, message: str, line: int | None = None):
        if line is not None:
            message = f"line {line}: {message}"
        super().__init__(message)
        self.line = line


class NumericalError(RuntimeError):
    """A loss component or parameter became NaN/Inf during optimization."""
