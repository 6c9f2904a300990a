"""Exception hierarchy shared across the toolkit."""


class BellwetherError(Exception):
    """Base class for all toolkit errors."""


class ConfigError(BellwetherError):
    """Bad manifest, rule, or run configuration."""


class DataValidationError(BellwetherError):
    """A dataset failed a structural or value check."""


class SchemaMismatchError(DataValidationError):
    """Datasets in one community disagree on attributes."""


class NotFittedError(BellwetherError):
    """A strategy was queried before fit."""
