"""Package-level error types."""
from __future__ import annotations


class ConfigError(ValueError):
    """Invalid configuration; names the offending field."""

    def __init__(self, field: str, message: str):
        super().__init__(f"{field}: {message}")
        self.field = field
