class InvalidInputError(ValueError):
    """Raised when an operation receives data outside its contract."""


class DimensionMismatchError(InvalidInputError):
    pass


class ConfigError(InvalidInputError):
    pass


class DecodeError(InvalidInputError):
    """An image file could not be read or decoded."""


class SolverError(RuntimeError):
    """The transportation solver failed to reach an optimal basis."""
