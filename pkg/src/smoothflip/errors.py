class ValidationError(ValueError):
    """Malformed input. `path` and `field` locate the offending value when known."""

    def __init__(self, message, path=None, field=None):
        super().__init__(message)
        self.path = path
        self.field = field


class DomainError(KeyError):
    """Lookup of a node outside a configuration's domain."""

    def __str__(self):
        return str(self.args[0]) if self.args else "node outside configuration domain"


class InvariantViolation(AssertionError):
    """An internal invariant failed; this indicates a bug, never bad input."""

    def __init__(self, message, context=None):
        super().__init__(message)
        self.context = context or {}


class TrivialArcError(ValueError):
    pass


class ScanBudgetExceeded(RuntimeError):
    pass


class DependentVectorsError(ValueError):
    """Raised with a rational combination of the vectors that vanishes."""

    def __init__(self, message, combination):
        super().__init__(message)
        self.combination = combination
