"""Exception hierarchy shared across the package.

Error kinds map onto the CLI exit-code contract: data/schema/config
problems exit 1, solver resource exhaustion exits 2.
"""

from __future__ import annotations


class StructScoreError(Exception):
    """Base class for all errors raised by this package."""

    kind = "error"


class InvalidComparisonError(StructScoreError):
    """Two values of different primitive kinds were compared."""

    kind = "data"


class SchemaError(StructScoreError):
    """A schema document is malformed or internally inconsistent."""

    kind = "schema"

    def __init__(self, message: str, path: str = ""):
        super().__init__(f"{path}: {message}" if path else message)
        self.path = path


class DataError(StructScoreError):
    """A document does not fit the expected shape."""

    kind = "data"

    def __init__(self, message: str, path: str = ""):
        super().__init__(f"{path}: {message}" if path else message)
        self.path = path


class ConfigurationError(StructScoreError):
    """An option or parameter is outside its legal range."""

    kind = "config"


class SolverResourceError(StructScoreError):
    """An exact solver exceeded its node budget."""

    kind = "resource"

    def __init__(self, limit: int):
        super().__init__(
            f"exact solver exceeded the node limit of {limit}; "
            "retry with a larger --node-limit or --solver hillclimb"
        )
        self.limit = limit
