"""Exception types shared across the package."""


class DomainError(ValueError):
    """An argument lies outside the domain where an operation is defined."""


class OutOfRegimeError(DomainError):
    """A perturbative formula is evaluated where it stops making sense."""


class ConvergenceError(RuntimeError):
    """A numerical procedure did not reach the requested accuracy."""
