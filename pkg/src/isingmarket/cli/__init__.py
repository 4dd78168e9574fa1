"""Command-line front end."""

from .configfile import parse_config
from .main import execute, main

__all__ = ["execute", "main", "parse_config"]
