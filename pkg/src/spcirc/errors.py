"""Error taxonomy shared by the library and the CLI.

DomainError maps to CLI exit code 1 (bad parameters, mismatched sizes),
CapacityError to exit code 2 (request exceeds the configured dense budget).
"""


class DomainError(ValueError):
    """Input outside the operation's domain (bad n, size mismatch, bad config)."""


class CapacityError(RuntimeError):
    """Request exceeds a configured memory/size budget."""


class ConsistencyError(RuntimeError):
    """An internal cross-check failed (e.g. a basis re-expansion residual);
    indicates a bug, not bad user input."""
