"""Exception types shared across the package."""


class DeflogError(Exception):
    """Base class for all deflog errors."""


class ParseError(DeflogError):
    def __init__(self, message: str, line: int = 0, column: int = 0):
        super().__init__(f"{line}:{column}: {message}" if line else message)
        self.line = line
        self.column = column


class TypeError_(DeflogError):
    """A type or arity violation found by the checker."""


class CapExceeded(DeflogError):
    """An enumeration would exceed a configured resource cap.

    This signals resource exhaustion, not invalid input.
    """


class NonTotalDefinitionError(DeflogError):
    """A let-bound definition has no exact well-founded model."""


class EvaluationError(DeflogError):
    """A semantic precondition was violated during evaluation."""
