"""Exception types shared across the bench."""


class ConfigurationError(ValueError):
    """A scenario file, run config, or grid axis is malformed."""


class AssemblyError(RuntimeError):
    """The performance matrix cannot be assembled (missing cells)."""
