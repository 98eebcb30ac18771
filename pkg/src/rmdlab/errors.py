"""Exception types shared across the package."""


class ResourceCapError(RuntimeError):
    """A requested computation exceeds a configured resource cap
    (sequence length, chain length, matrix count)."""


class NotThermalizedError(RuntimeError):
    """A trace never crosses the requested threshold band; the run must be
    extended or the point dropped from the sweep."""


class ConfigError(ValueError):
    """Invalid experiment configuration."""
