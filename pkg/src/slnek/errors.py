"""Exception types shared across the package."""


class UnsupportedDimensionError(ValueError):
    """Raised for matrix dimensions the enumerators do not handle."""


class CountOverflowError(OverflowError):
    """Raised when a ball count would not fit in a signed 64-bit integer."""


class SieveLimitError(ValueError):
    """Raised when a value lies beyond the factor sieve's range."""


class NotSquarefreeError(ValueError):
    pass


class NotPrimeError(ValueError):
    pass


class SearchSpaceTooLargeError(ValueError):
    """Raised when an exhaustive search would exceed its hard size guard."""


class DegenerateMomentsError(ValueError):
    """Raised when sigma_P is zero, so standardization is undefined."""
