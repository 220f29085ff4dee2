"""Exception types shared across the package."""


class NCTorusError(Exception):
    """Base class for all package errors."""


class InvalidArgument(NCTorusError, ValueError):
    """An argument has the wrong shape, sign or dimension."""


class DomainError(NCTorusError, ArithmeticError):
    """A numerical operation left its domain (branch cut, singular matrix, ...)."""

    def __init__(self, message, **diagnostics):
        super().__init__(message)
        self.diagnostics = diagnostics


class ResourceError(NCTorusError, RuntimeError):
    """A configured point or memory budget would be exceeded."""


class ConstructionError(NCTorusError, RuntimeError):
    """A derived object failed its self-check at construction time."""


class PreconditionViolation(NCTorusError, ValueError):
    """Input data does not satisfy a numerical precondition."""

    def __init__(self, message, **diagnostics):
        super().__init__(message)
        self.diagnostics = diagnostics
