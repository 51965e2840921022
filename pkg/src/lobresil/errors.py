class InputError(Exception):
    """Bad input data or configuration (CLI exit code 1)."""


class RejectedEvent(InputError):
    """An order-flow event that cannot be applied; the book is left unchanged."""


class InvariantViolation(RuntimeError):
    """Internal consistency check failed (CLI exit code 2)."""


class InfeasibleShock(ValueError):
    """The book cannot support the requested shock type at the requested time."""

    def __init__(self, message, feasible=()):
        super().__init__(message)
        self.feasible = tuple(feasible)
