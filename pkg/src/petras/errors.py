class PetrasError(Exception):
    """Base class for errors raised by this package."""


class DomainError(PetrasError, ValueError):
    """An argument lies outside the domain of an operation."""


class PreconditionError(PetrasError):
    """An oracle was called on input it does not accept."""


class IterationCapExceeded(PetrasError):
    """The bisection loop hit its cap; ``partition`` holds the partial state."""

    def __init__(self, message, partition=None, bisections=0):
        super().__init__(message)
        self.partition = partition
        self.bisections = bisections
