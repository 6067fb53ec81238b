"""Exception types shared across the toolkit."""


class ValidationError(ValueError):
    """Malformed or out-of-range input (CLI exit code 2)."""


class ContractError(ValidationError):
    """A precondition on an operation's input was violated."""


class SizeCapError(ValidationError):
    """A requested matrix would exceed the configured entry cap."""


class NumericalFailureError(RuntimeError):
    """An internal numerical cross-check failed (CLI exit code 3)."""
