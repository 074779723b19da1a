from typing import List, Optional


class NonMarkovError(Exception):
    pass


class ValidationError(NonMarkovError, ValueError):
    """
    Raised for invalid user input or violated preconditions.

    Parameters:
        message:
            Human readable summary.
        violations:
            The individual violated invariants, if there is more than one.
    """

    def __init__(self, message: str, violations: Optional[List[str]] = None):
        super(ValidationError, self).__init__(message)
        self.violations = list(violations) if violations else [message]


class WtdSyntaxError(ValidationError):

    def __init__(self, message: str, line: int, column: int):
        super(WtdSyntaxError, self).__init__(f"{message} at col {column}")
        self.line = line
        self.column = column


class NumericalError(NonMarkovError, ArithmeticError):
    pass
