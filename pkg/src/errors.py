from constants import (
    EXIT_PARSE,
    EXIT_CONVERGENCE,
    EXIT_DOMAIN,
    EXIT_INTEGRATION,
)


class VineError(Exception):
    """Base class for all errors raised by the vine engine."""
    exit_code = 1


class ParseError(VineError):
    exit_code = EXIT_PARSE

    def __init__(self, message, section=None, line=None, column=None):
        self.section = section
        self.line = line
        self.column = column
        where = []
        if section is not None:
            where.append(f"section {section}")
        if line is not None:
            where.append(f"line {line}")
        if column is not None:
            where.append(f"column {column}")
        if where:
            message = f"{message} ({', '.join(where)})"
        super().__init__(message)


class NonNumericError(ParseError):
    pass


class ConstantColumnError(ParseError):
    pass


class DimensionMismatchError(ParseError):
    pass


class StructureError(VineError):
    exit_code = EXIT_PARSE

    def __init__(self, message, position=None):
        self.position = position
        if position is not None:
            message = f"{message} at position {position}"
        super().__init__(message)


class ConvergenceError(VineError):
    exit_code = EXIT_CONVERGENCE


class SingularityError(VineError):
    exit_code = EXIT_CONVERGENCE


class DomainError(VineError):
    exit_code = EXIT_DOMAIN


class EvalError(VineError):
    exit_code = EXIT_DOMAIN

    def __init__(self, message, row=None):
        self.row = row
        if row is not None:
            message = f"{message} (row {row})"
        super().__init__(message)


class IntegrationError(VineError):
    exit_code = EXIT_INTEGRATION


class BoundaryWarning(UserWarning):
    pass


class SingularityWarning(UserWarning):
    pass


class ClampWarning(UserWarning):
    pass
