"""Exception types shared across the package."""


class B2srError(Exception):
    """Base class for errors raised by this package."""


class FormatError(B2srError):
    """A matrix, vector, or on-disk container violates a structural invariant."""


class MatrixMarketError(B2srError):
    """A Matrix Market file could not be parsed or uses an unsupported feature."""
