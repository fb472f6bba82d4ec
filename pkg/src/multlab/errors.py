"""Exception types shared across the package."""


class ConfigurationError(ValueError):
    """Invalid input or configuration (bad mesh size, unsupported norm, ...)."""


class NumericFailure(RuntimeError):
    """A numerical procedure failed to converge or produced non-finite output."""
