"""Exception types shared across the package."""


class UncloneableError(Exception):
    """Base class for all errors raised by this package."""


class ParameterError(UncloneableError, ValueError):
    """Inputs have the wrong length, range or mismatched parameters."""


class CapabilityError(UncloneableError, RuntimeError):
    """The request exceeds what an engine or enumeration can handle."""


class SearchExhaustedError(UncloneableError, RuntimeError):
    """Code search found no feasible pair within its budget."""

    def __init__(self, message, trials):
        super().__init__(f"{message} (after {trials} trials)")
        self.trials = trials


class UsageError(UncloneableError, RuntimeError):
    """A contract on stateful objects was violated (e.g. pad reuse)."""


class InvariantError(UncloneableError, AssertionError):
    """An internal consistency check failed."""
