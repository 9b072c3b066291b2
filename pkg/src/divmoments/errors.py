"""Exception types shared across modules; the CLI maps each to an exit code."""


class BudgetError(RuntimeError):
    """A computation was refused because it exceeds its enumeration budget."""


class ConsistencyError(RuntimeError):
    """An internal cross-check failed (e.g. streamed D(x) vs the hyperbola value)."""


class CheckpointMismatch(ValueError):
    """A resume was requested against checkpoints written with another config."""


class CheckFailed(AssertionError):
    """A verification command found a violated property."""
