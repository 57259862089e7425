"""Exception types shared across the package."""


class DataFormatError(ValueError):
    """A dataset or split file is malformed or fails validation."""


class InternalError(RuntimeError):
    """An internal invariant was violated (a bug, not a user error)."""
