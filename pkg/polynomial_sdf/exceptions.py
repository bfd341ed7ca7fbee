"""
Exception types shared across the services.

Caller mistakes are ValueError subclasses so they can be handled
the same way everywhere. Numerical breakdowns are ArithmeticError
subclasses, which the command layer maps to their own exit code.
"""

from pathlib import Path


class ConfigError(ValueError):
    """Invalid or unknown configuration value."""


class OutOfDomainError(ValueError):
    """A coordinate lies outside the model domain."""


class EmptyMeshError(ValueError):
    """A mesh without faces was passed where geometry is required."""


class ParseError(ValueError):
    """Malformed input file, with the offending location when known."""

    def __init__(self, message: str, path: str | Path | None = None,
                 line: int | None = None):
        self.path = str(path) if path is not None else None
        self.line = line
        location = ""
        if self.path is not None:
            location = self.path
            if line is not None:
                location += f":{line}"
            location += ": "
        super().__init__(f"{location}{message}")


class SnapshotError(ParseError):
    """Model snapshot file is unreadable or has the wrong version."""


class NumericalError(ArithmeticError):
    """A linear system could not be solved or a factorization failed."""


class VanishingGradientError(NumericalError):
    """The field gradient is too small to define a direction."""
