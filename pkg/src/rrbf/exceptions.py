"""Exception types shared across the package."""


class DataFormatError(ValueError):
    """A data file exists but cannot be parsed under the declared schema."""


class ConfigError(ValueError):
    """A method/dataset combination or option set is invalid before any work runs."""
