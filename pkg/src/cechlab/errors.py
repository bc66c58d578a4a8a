"""Exception types shared across the package."""


class ConfigurationError(ValueError):
    """A run configuration (config file, CLI flags, density, radius law) is invalid."""


class AuditError(RuntimeError):
    """A runtime audit found a violated invariant, e.g. a counting bound failure."""
