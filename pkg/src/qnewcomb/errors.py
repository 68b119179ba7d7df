"""Exception hierarchy shared by the library and the command line."""


class QNewcombError(Exception):
    """Base class for all errors raised by this package."""


class ValidationError(QNewcombError, ValueError):
    """Rejected input: bad dimensions, out-of-range parameters, non-unitary tactics."""


class ConsistencyError(QNewcombError, RuntimeError):
    """An intermediate result violated a density-operator invariant."""


class SpecSyntaxError(ValidationError):
    """Game-spec document is not well-formed JSON."""

    def __init__(self, msg: str, line: int, column: int):
        super().__init__(f"{msg} (line {line}, column {column})")
        self.line = line
        self.column = column


class SpecSchemaError(ValidationError):
    """Game-spec document does not match the schema."""

    def __init__(self, path: str, msg: str):
        super().__init__(f"{path}: {msg}")
        self.path = path


class SpecSemanticError(ValidationError):
    """Game-spec document is well-typed but describes an invalid game."""
