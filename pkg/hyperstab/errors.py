"""Exception hierarchy.

Every error carries the module and operation it was raised from so that
CLI messages can name both.
"""


class HyperstabError(Exception):
    """Base error for all hyperstab failures."""

    def __init__(self, message: str, *, module: str = "", operation: str = ""):
        self.module = module
        self.operation = operation
        self.detail = message
        prefix = f"{module}.{operation}: " if module and operation else ""
        super().__init__(f"{prefix}{message}")


class DomainError(HyperstabError):
    """Argument outside the domain of an operation."""


class PreconditionError(HyperstabError):
    """A documented precondition does not hold."""


class DimensionError(HyperstabError):
    """Operator, state or weight dimensions disagree."""


class ConvergenceError(HyperstabError):
    """An iterative procedure did not converge within its budget."""

    def __init__(self, message: str, *, last_ratio: float | None = None, **kwargs):
        self.last_ratio = last_ratio
        super().__init__(message, **kwargs)


class InsufficientSamplesError(HyperstabError):
    """Not enough usable samples for a fit or a quadrature."""


class CertificationError(HyperstabError):
    """A certificate cannot be issued for this run."""


class ConfigError(HyperstabError):
    """Invalid command-line usage or configuration."""
