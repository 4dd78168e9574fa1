"""Kinetic Ising market model, random-utility choice, quantum decision theory
and stylized-facts statistics."""

__version__ = "0.1.0"

from . import discrete_choice, market, qdt, stylized_stats  # noqa: E402
from .errors import (  # noqa: E402
    ConfigError,
    ConstraintViolation,
    DomainError,
    IntegrityError,
    IsingMarketError,
    PersistenceError,
    SchemaVersionError,
    SimulationError,
)

__all__ = [
    "__version__",
    "discrete_choice",
    "market",
    "qdt",
    "stylized_stats",
    "ConfigError",
    "ConstraintViolation",
    "DomainError",
    "IntegrityError",
    "IsingMarketError",
    "PersistenceError",
    "SchemaVersionError",
    "SimulationError",
]
