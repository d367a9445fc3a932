"""Exception types shared across the package."""


class DomainError(ValueError):
    """Raised when an argument lies outside the supported physical domain."""


class ConfigError(ValueError):
    """Invalid run configuration; carries the offending field name."""

    def __init__(self, field: str, message: str):
        super().__init__(f"{field}: {message}")
        self.field = field


class NumericalError(RuntimeError):
    """A numerical routine failed to converge or broke an accuracy guarantee."""
