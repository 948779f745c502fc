"""
Error types shared by the engine modules.
"""


class InvalidParameterError(ValueError):
    """Raised when an operation receives a parameter outside its domain."""


class RulesFormatError(InvalidParameterError):
    """A rules file line could not be parsed."""

    def __init__(self, line_number: int, line: str, reason: str):
        self.line_number = line_number
        self.line = line
        self.reason = reason
        super().__init__(f"rules line {line_number}: {reason}: {line!r}")
