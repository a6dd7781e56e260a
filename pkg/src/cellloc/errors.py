"""Exception types shared across the package."""


class CellLocError(Exception):
    """Base class for all cellloc errors."""


class ParseError(CellLocError, ValueError):
    """A malformed input file. The message names the file, row and column."""


class ConfigError(CellLocError, ValueError):
    """A run configuration that is missing, inconsistent or references
    files that do not exist."""


class DegeneratePriorError(CellLocError, ValueError):
    """A location prior with zero total mass. Raised instead of silently
    falling back to uniform, which would corrupt posteriors downstream."""


class InvariantError(CellLocError, RuntimeError):
    """An internal invariant was violated. Carries the invariant name."""

    def __init__(self, invariant: str, message: str = ""):
        self.invariant = invariant
        super().__init__(f"{invariant}: {message}" if message else invariant)
