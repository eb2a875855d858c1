"""Exception hierarchy shared by all modules.

The CLI maps these onto process exit codes: ConfigError -> 2,
InvariantViolation -> 3, NumericalFailure -> 4.
"""


class LosMimoError(Exception):
    """Base class for all package errors."""


class ConfigError(LosMimoError):
    """Malformed or inconsistent scenario configuration."""


class InvariantViolation(LosMimoError, ValueError):
    """A domain invariant or precondition does not hold; the message names it."""


class NumericalFailure(LosMimoError, RuntimeError):
    """A numerical routine (SVD, eigensolver, quadrature) failed to converge."""
