"""Exception hierarchy shared by every module."""

from __future__ import annotations


class IsingMarketError(Exception):
    """Base class for all package errors."""


class DomainError(IsingMarketError, ValueError):
    """An argument lies outside the domain of the operation."""


class ConstraintViolation(DomainError):
    """A probability-measure constraint is violated (no repair is attempted)."""


class ConfigError(IsingMarketError, ValueError):
    """Invalid or inconsistent configuration.

    ``line`` is the 1-based line number in the source file, when known.
    """

    def __init__(self, message: str, line: int | None = None, path: str | None = None):
        self.line = line
        self.path = path
        where = ""
        if path is not None:
            where = f"{path}:"
        if line is not None:
            where += f"{line}:"
        super().__init__(f"{where} {message}" if where else message)


class SimulationError(IsingMarketError, RuntimeError):
    """The model produced an invalid state during a run."""


class PersistenceError(IsingMarketError, OSError):
    """Reading or writing run artifacts failed."""


class IntegrityError(PersistenceError):
    """A data file does not match the digest recorded in its manifest."""


class SchemaVersionError(PersistenceError):
    """A manifest was written with an unsupported schema version."""
