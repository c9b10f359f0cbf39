"""Exception types shared across the package."""


class TaxomapError(Exception):
    """Base class for all errors raised by this package."""


class LoadError(TaxomapError):
    """A tabular input file is malformed or internally inconsistent."""

    def __init__(self, message: str, path: str | None = None, line: int | None = None):
        where = ""
        if path is not None:
            where = f" [{path}" + (f":{line}" if line is not None else "") + "]"
        super().__init__(message + where)
        self.path = path
        self.line = line


class UnknownClassError(TaxomapError):
    """A class id was queried that is not present in the graph."""


class NotAChainError(TaxomapError):
    """A set of classes expected to form an ancestor chain does not."""


class NoRootError(TaxomapError):
    """A class name contains no token that can serve as its root word."""


class ProviderFormatError(TaxomapError):
    """A precomputed annotation entry violates the parse-tree invariants."""


class DimensionMismatchError(TaxomapError):
    """Two vectors of different dimensionality were combined."""


class ZeroVectorError(TaxomapError):
    """An all-zero vector was used where a direction is required."""


class StageDependencyError(TaxomapError):
    """A pipeline stage was requested before its prerequisites exist."""

    def __init__(self, stage: str, missing: str):
        super().__init__(f"stage '{stage}' requires artifacts from stage '{missing}'")
        self.stage = stage
        self.missing = missing


class ConfigError(TaxomapError):
    """Pipeline configuration is invalid."""
