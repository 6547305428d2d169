"""Exception types shared across the package."""


class SphereminError(Exception):
    """Base class for all package errors."""


class ConfigurationError(SphereminError, ValueError):
    """An invalid parameter was supplied at construction time (e.g. jet order)."""


class UsageError(SphereminError, ValueError):
    """Operands or arguments are incompatible (order mismatch, unknown name, ...)."""


class SingularityError(SphereminError, ArithmeticError):
    """A jet operation hit a singular point (division by zero value, sqrt of x <= 0)."""


class DomainError(SphereminError, ValueError):
    """A chart point lies outside the admissible domain or the metric degenerates."""
